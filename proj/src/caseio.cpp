#include "lsebu/caseio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

namespace lsebu {

namespace {

struct Token {
    std::string text;
    std::size_t line = 0;
    std::size_t col = 0;
};

// Splits the body of a matrix literal into rows of numeric tokens.
// Rows end at ';' or newline; ',' counts as column whitespace.
class MatrixScanner {
public:
    MatrixScanner(std::string_view body, std::size_t line, std::size_t col)
        : body_(body), line_(line), col_(col) {}

    std::vector<std::vector<Token>> rows() {
        std::vector<std::vector<Token>> out;
        std::vector<Token> current;
        std::string tok;
        std::size_t tok_line = line_, tok_col = col_;

        auto flush_token = [&] {
            if (!tok.empty()) {
                current.push_back({tok, tok_line, tok_col});
                tok.clear();
            }
        };
        auto flush_row = [&] {
            flush_token();
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        };

        bool in_comment = false;
        for (char c : body_) {
            if (c == '\n') {
                in_comment = false;
                flush_row();
                ++line_;
                col_ = 1;
                continue;
            }
            ++col_;
            if (in_comment) continue;
            if (c == '%') {
                in_comment = true;
                continue;
            }
            if (c == ';') {
                flush_row();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
                flush_token();
            } else {
                if (tok.empty()) {
                    tok_line = line_;
                    tok_col = col_ - 1;
                }
                tok.push_back(c);
            }
        }
        flush_row();
        return out;
    }

private:
    std::string_view body_;
    std::size_t line_;
    std::size_t col_;
};

double parse_number(const Token& t) {
    const std::string& s = t.text;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("expected a number, got '" + s + "'", t.line, t.col);
    }
    if (pos != s.size()) throw ParseError("trailing characters in number '" + s + "'", t.line, t.col);
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + s + "'", t.line, t.col);
    return v;
}

struct RawField {
    bool is_matrix = false;
    double scalar = 0.0;
    std::vector<std::vector<Token>> rows;
    std::size_t line = 0;
};

// Statement-level scan of the whole file. Tolerates arbitrary bytes: every
// malformed construct maps to a ParseError, never undefined behavior.
std::unordered_map<std::string, RawField> scan_fields(std::string_view text) {
    std::unordered_map<std::string, RawField> fields;
    std::size_t i = 0, line = 1, col = 1;
    const std::size_t n = text.size();

    auto advance = [&](std::size_t count) {
        for (std::size_t k = 0; k < count && i < n; ++k) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto skip_ws_and_comments = [&] {
        while (i < n) {
            const char c = text[i];
            if (c == '%') {
                while (i < n && text[i] != '\n') advance(1);
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance(1);
            } else {
                break;
            }
        }
    };
    auto skip_line = [&] {
        while (i < n && text[i] != '\n') advance(1);
    };

    bool first_statement = true;
    while (true) {
        skip_ws_and_comments();
        if (i >= n) break;

        if (first_statement && text.compare(i, 8, "function") == 0) {
            skip_line();
            first_statement = false;
            continue;
        }
        first_statement = false;

        if (text.compare(i, 4, "mpc.") != 0)
            throw ParseError("expected 'mpc.<name> = ...' statement", line, col);
        advance(4);

        std::string name;
        while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
            name.push_back(text[i]);
            advance(1);
        }
        if (name.empty()) throw ParseError("missing field name after 'mpc.'", line, col);

        skip_ws_and_comments();
        if (i >= n || text[i] != '=') throw ParseError("expected '=' after mpc." + name, line, col);
        advance(1);
        skip_ws_and_comments();
        if (i >= n) throw ParseError("unexpected end of input in mpc." + name, line, col);

        RawField field;
        field.line = line;
        if (text[i] == '[') {
            advance(1);
            const std::size_t body_start = i, body_line = line, body_col = col;
            std::size_t depth = 1;
            while (i < n && depth > 0) {
                if (text[i] == '[') ++depth;
                if (text[i] == ']') --depth;
                if (text[i] == '%') {
                    while (i < n && text[i] != '\n') advance(1);
                    continue;
                }
                if (depth > 0) advance(1);
            }
            if (i >= n) throw ParseError("unterminated '[' in mpc." + name, body_line, body_col);
            MatrixScanner scanner(text.substr(body_start, i - body_start), body_line, body_col);
            field.is_matrix = true;
            field.rows = scanner.rows();
            advance(1);  // closing ']'
        } else if (text[i] == '\'') {
            advance(1);
            while (i < n && text[i] != '\'' && text[i] != '\n') advance(1);
            if (i >= n || text[i] != '\'') throw ParseError("unterminated string in mpc." + name, line, col);
            advance(1);
            // String-valued fields (mpc.version) are accepted and ignored.
            fields.erase(name);
            skip_ws_and_comments();
            if (i < n && text[i] == ';') advance(1);
            continue;
        } else {
            std::string num;
            const std::size_t num_line = line, num_col = col;
            while (i < n && text[i] != ';' && text[i] != '\n' && text[i] != '%') {
                num.push_back(text[i]);
                advance(1);
            }
            while (!num.empty() && (num.back() == ' ' || num.back() == '\t' || num.back() == '\r'))
                num.pop_back();
            field.scalar = parse_number({num, num_line, num_col});
        }

        skip_ws_and_comments();
        if (i < n && text[i] == ';') advance(1);

        fields[name] = std::move(field);
    }
    return fields;
}

const RawField& required_matrix(const std::unordered_map<std::string, RawField>& fields,
                                const char* name, std::size_t min_cols) {
    auto it = fields.find(name);
    if (it == fields.end() || !it->second.is_matrix)
        throw ParseError(std::string("missing required matrix mpc.") + name, 1, 1);
    for (const auto& row : it->second.rows) {
        if (row.size() < min_cols)
            throw ParseError(std::string("mpc.") + name + " row has " + std::to_string(row.size()) +
                                 " columns, need at least " + std::to_string(min_cols),
                             row.empty() ? it->second.line : row[0].line,
                             row.empty() ? 1 : row[0].col);
    }
    return it->second;
}

int parse_int(const Token& t) {
    const double v = parse_number(t);
    const double r = std::nearbyint(v);
    if (std::abs(v - r) > 1e-9 || std::abs(r) > 2.1e9)
        throw ParseError("expected an integer, got '" + t.text + "'", t.line, t.col);
    return static_cast<int>(r);
}

}  // namespace

std::size_t NetworkCase::index_of(int bus_id) const {
    auto it = bus_index.find(bus_id);
    if (it == bus_index.end())
        throw ValidationError("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

std::size_t NetworkCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::Slack) return i;
    throw ValidationError("case has no slack bus");
}

NetworkCase parse_case(std::string_view text) {
    const auto fields = scan_fields(text);

    NetworkCase net;
    auto base = fields.find("baseMVA");
    if (base == fields.end() || base->second.is_matrix)
        throw ParseError("missing required scalar mpc.baseMVA", 1, 1);
    net.base_mva = base->second.scalar;
    if (!(net.base_mva > 0.0)) throw ValidationError("baseMVA must be positive");

    const RawField& bus_rows = required_matrix(fields, "bus", 13);
    const RawField& gen_rows = required_matrix(fields, "gen", 10);
    const RawField& branch_rows = required_matrix(fields, "branch", 13);

    int slack_count = 0;
    for (const auto& row : bus_rows.rows) {
        Bus b;
        b.id = parse_int(row[0]);
        const int kind = parse_int(row[1]);
        switch (kind) {
            case 1: b.kind = BusKind::PQ; break;
            case 2: b.kind = BusKind::PV; break;
            case 3: b.kind = BusKind::Slack; ++slack_count; break;
            default:
                throw ParseError("unsupported bus type " + std::to_string(kind), row[1].line, row[1].col);
        }
        b.p_demand = parse_number(row[2]);
        b.q_demand = parse_number(row[3]);
        b.g_shunt = parse_number(row[4]);
        b.b_shunt = parse_number(row[5]);
        b.v_mag_init = parse_number(row[7]);
        b.v_ang_init = parse_number(row[8]);
        b.base_kv = parse_number(row[9]);
        if (!(b.v_mag_init > 0.0))
            throw ValidationError("bus " + std::to_string(b.id) + ": initial voltage magnitude must be positive");
        if (net.bus_index.count(b.id))
            throw ParseError("duplicate bus id " + std::to_string(b.id), row[0].line, row[0].col);
        net.bus_index.emplace(b.id, net.buses.size());
        net.buses.push_back(b);
    }
    if (slack_count == 0) throw ValidationError("case has no slack bus");
    if (slack_count > 1) throw ValidationError("case has multiple slack buses");

    for (const auto& row : gen_rows.rows) {
        Generator g;
        g.bus = parse_int(row[0]);
        g.p_gen = parse_number(row[1]);
        g.q_gen = parse_number(row[2]);
        g.v_setpoint = parse_number(row[5]);
        g.status = parse_int(row[7]) > 0 ? GenStatus::On : GenStatus::Off;
        if (!net.bus_index.count(g.bus))
            throw ParseError("generator references unknown bus " + std::to_string(g.bus),
                             row[0].line, row[0].col);
        net.generators.push_back(g);
    }

    for (const auto& row : branch_rows.rows) {
        Branch br;
        br.from_bus = parse_int(row[0]);
        br.to_bus = parse_int(row[1]);
        br.r = parse_number(row[2]);
        br.x = parse_number(row[3]);
        br.b_total = parse_number(row[4]);
        br.tap = parse_number(row[8]);
        br.shift = parse_number(row[9]);
        br.status = parse_int(row[10]) > 0 ? BranchStatus::InService : BranchStatus::OutOfService;
        if (!net.bus_index.count(br.from_bus))
            throw ParseError("branch references unknown bus " + std::to_string(br.from_bus),
                             row[0].line, row[0].col);
        if (!net.bus_index.count(br.to_bus))
            throw ParseError("branch references unknown bus " + std::to_string(br.to_bus),
                             row[1].line, row[1].col);
        if (br.from_bus == br.to_bus)
            throw ValidationError("branch connects bus " + std::to_string(br.from_bus) + " to itself");
        if (br.status == BranchStatus::InService && br.r * br.r + br.x * br.x == 0.0)
            throw ValidationError("in-service branch " + std::to_string(br.from_bus) + "-" +
                                  std::to_string(br.to_bus) + " has zero series impedance");
        net.branches.push_back(br);
    }

    return net;
}

NetworkCase load_case_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open case file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    NetworkCase net = parse_case(buf.str());
    // Derive a case name from the file stem.
    std::string stem = path;
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    if (!stem.empty()) net.name = stem;
    return net;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string write_case(const NetworkCase& net) {
    std::ostringstream out;
    out << "function mpc = " << net.name << "\n";
    out << "mpc.version = '2';\n";
    out << "mpc.baseMVA = " << fmt(net.base_mva) << ";\n\n";

    out << "%% bus data\n";
    out << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
    out << "mpc.bus = [\n";
    for (const Bus& b : net.buses) {
        int type = b.kind == BusKind::Slack ? 3 : (b.kind == BusKind::PV ? 2 : 1);
        out << '\t' << b.id << '\t' << type << '\t' << fmt(b.p_demand) << '\t' << fmt(b.q_demand)
            << '\t' << fmt(b.g_shunt) << '\t' << fmt(b.b_shunt) << "\t1\t" << fmt(b.v_mag_init)
            << '\t' << fmt(b.v_ang_init) << '\t' << fmt(b.base_kv) << "\t1\t1.1\t0.9;\n";
    }
    out << "];\n\n";

    out << "%% generator data\n";
    out << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
    out << "mpc.gen = [\n";
    for (const Generator& g : net.generators) {
        out << '\t' << g.bus << '\t' << fmt(g.p_gen) << '\t' << fmt(g.q_gen) << "\t9999\t-9999\t"
            << fmt(g.v_setpoint) << "\t100\t" << (g.status == GenStatus::On ? 1 : 0)
            << "\t9999\t-9999;\n";
    }
    out << "];\n\n";

    out << "%% branch data\n";
    out << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
    out << "mpc.branch = [\n";
    for (const Branch& br : net.branches) {
        out << '\t' << br.from_bus << '\t' << br.to_bus << '\t' << fmt(br.r) << '\t' << fmt(br.x)
            << '\t' << fmt(br.b_total) << "\t0\t0\t0\t" << fmt(br.tap) << '\t' << fmt(br.shift)
            << '\t' << (br.status == BranchStatus::InService ? 1 : 0) << "\t-360\t360;\n";
    }
    out << "];\n";
    return out.str();
}

void save_case_file(const NetworkCase& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << write_case(net);
    if (!out) throw IoError("write failed: " + path);
}

bool is_connected(const NetworkCase& net) {
    if (net.buses.empty()) return false;
    std::vector<std::vector<std::size_t>> adj(net.buses.size());
    for (const Branch& br : net.branches) {
        if (br.status != BranchStatus::InService) continue;
        const std::size_t f = net.index_of(br.from_bus), t = net.index_of(br.to_bus);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<char> seen(net.buses.size(), 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == net.buses.size();
}

}  // namespace lsebu
