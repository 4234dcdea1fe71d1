#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "lsebu/caseio.hpp"
#include "lsebu/rng.hpp"

using namespace lsebu;

namespace {

std::string data_path(const char* name) { return std::string(LSEBU_DATA_DIR) + "/" + name; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kTinyCase = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.0	0	230	1	1.1	0.9;
	2	1	10	5	0	0	1	1.0	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	10	0	50	-50	1.0	100	1	100	0;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	0	0	0	0	0	1	-360	360;
];
)";

bool cases_equal(const NetworkCase& a, const NetworkCase& b, double rel = 1e-12) {
    auto close = [&](double x, double y) {
        return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
    };
    if (a.buses.size() != b.buses.size() || a.branches.size() != b.branches.size() ||
        a.generators.size() != b.generators.size() || !close(a.base_mva, b.base_mva))
        return false;
    for (std::size_t i = 0; i < a.buses.size(); ++i) {
        const Bus &x = a.buses[i], &y = b.buses[i];
        if (x.id != y.id || x.kind != y.kind || !close(x.p_demand, y.p_demand) ||
            !close(x.q_demand, y.q_demand) || !close(x.g_shunt, y.g_shunt) ||
            !close(x.b_shunt, y.b_shunt) || !close(x.v_mag_init, y.v_mag_init) ||
            !close(x.v_ang_init, y.v_ang_init) || !close(x.base_kv, y.base_kv))
            return false;
    }
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        const Branch &x = a.branches[i], &y = b.branches[i];
        if (x.from_bus != y.from_bus || x.to_bus != y.to_bus || x.status != y.status ||
            !close(x.r, y.r) || !close(x.x, y.x) || !close(x.b_total, y.b_total) ||
            !close(x.tap, y.tap) || !close(x.shift, y.shift))
            return false;
    }
    for (std::size_t i = 0; i < a.generators.size(); ++i) {
        const Generator &x = a.generators[i], &y = b.generators[i];
        if (x.bus != y.bus || x.status != y.status || !close(x.p_gen, y.p_gen) ||
            !close(x.q_gen, y.q_gen) || !close(x.v_setpoint, y.v_setpoint))
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("bundled case5 parses with expected counts") {
    const NetworkCase net = load_case_file(data_path("case5.m"));
    CHECK(net.buses.size() == 5);
    CHECK(net.branches.size() == 6);
    CHECK(net.generators.size() == 5);
    CHECK(net.base_mva == 100.0);
    CHECK(net.buses[3].kind == BusKind::Slack);
}

TEST_CASE("bundled case14 parses with expected counts") {
    const NetworkCase net = load_case_file(data_path("case14.m"));
    CHECK(net.buses.size() == 14);
    CHECK(net.branches.size() == 20);
    // File order is preserved.
    CHECK(net.branches[7].from_bus == 4);
    CHECK(net.branches[7].to_bus == 7);
    CHECK(net.branches[7].tap == doctest::Approx(0.978));
}

TEST_CASE("bundled case30/case57/case118 parse") {
    CHECK(load_case_file(data_path("case30.m")).buses.size() == 30);
    CHECK(load_case_file(data_path("case57.m")).buses.size() == 57);
    const NetworkCase net118 = load_case_file(data_path("case118.m"));
    CHECK(net118.buses.size() == 118);
    CHECK(is_connected(net118));
}

TEST_CASE("missing required matrix is an error") {
    CHECK_THROWS_AS(parse_case("mpc.baseMVA = 100;\n"), ParseError);
}

TEST_CASE("structural validation errors") {
    std::string dup = kTinyCase;
    const auto pos = dup.find("\t2\t1\t10");
    dup.replace(pos, 2, "\t1");  // duplicate bus id 1
    CHECK_THROWS_AS(parse_case(dup), ParseError);

    std::string dangling = kTinyCase;
    dangling.replace(dangling.find("\t1\t2\t0.01"), 4, "\t1\t9");
    CHECK_THROWS_AS(parse_case(dangling), ParseError);

    std::string no_slack = kTinyCase;
    no_slack.replace(no_slack.find("\t1\t3\t0"), 4, "\t1\t1");
    CHECK_THROWS_AS(parse_case(no_slack), ValidationError);

    std::string two_slack = kTinyCase;
    two_slack.replace(two_slack.find("\t2\t1\t10"), 4, "\t2\t3");
    CHECK_THROWS_AS(parse_case(two_slack), ValidationError);

    std::string self_loop = kTinyCase;
    self_loop.replace(self_loop.find("\t1\t2\t0.01"), 4, "\t1\t1");
    CHECK_THROWS_AS(parse_case(self_loop), ValidationError);

    std::string zero_z = kTinyCase;
    zero_z.replace(zero_z.find("0.01\t0.1"), 8, "0\t0\t");
    CHECK_THROWS_AS(parse_case(zero_z), ValidationError);
}

TEST_CASE("parse errors carry positions") {
    try {
        parse_case("mpc.baseMVA = banana;\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() > 1);
    }
}

TEST_CASE("round-trip is the identity on every bundled case") {
    for (const char* name : {"case5.m", "case14.m", "case30.m", "case57.m", "case118.m"}) {
        const NetworkCase net = parse_case(read_file(data_path(name)));
        const NetworkCase again = parse_case(write_case(net));
        CHECK_MESSAGE(cases_equal(net, again), name);
    }
}

TEST_CASE("round-trip property on randomly generated cases") {
    Rng rng(2468);
    for (int rep = 0; rep < 50; ++rep) {
        NetworkCase net;
        net.name = "prop";
        net.base_mva = 50.0 + 100.0 * rng.uniform();
        const int nb = 2 + static_cast<int>(rng.uniform() * 8);
        for (int i = 0; i < nb; ++i) {
            Bus b;
            b.id = i * 3 + 1;  // deliberately sparse ids
            b.kind = i == 0 ? BusKind::Slack : (rng.uniform() < 0.3 ? BusKind::PV : BusKind::PQ);
            b.p_demand = 100.0 * (rng.uniform() - 0.3);
            b.q_demand = 40.0 * (rng.uniform() - 0.5);
            b.b_shunt = rng.uniform() < 0.2 ? 10.0 * rng.uniform() : 0.0;
            b.v_mag_init = 0.95 + 0.1 * rng.uniform();
            b.v_ang_init = 10.0 * (rng.uniform() - 0.5);
            b.base_kv = 132.0;
            net.bus_index.emplace(b.id, net.buses.size());
            net.buses.push_back(b);
        }
        for (int i = 1; i < nb; ++i) {  // spanning chain plus chords
            Branch br;
            br.from_bus = net.buses[static_cast<std::size_t>(rng.uniform() * i)].id;
            br.to_bus = net.buses[i].id;
            br.r = 0.3 * rng.uniform();
            br.x = 0.01 + 0.5 * rng.uniform();
            br.b_total = 0.1 * rng.uniform();
            br.tap = rng.uniform() < 0.3 ? 0.9 + 0.2 * rng.uniform() : 0.0;
            br.shift = rng.uniform() < 0.2 ? 5.0 * (rng.uniform() - 0.5) : 0.0;
            net.branches.push_back(br);
        }
        Generator g;
        g.bus = net.buses[0].id;
        g.p_gen = 123.456789 * rng.uniform();
        g.v_setpoint = 1.0 + 0.05 * rng.uniform();
        net.generators.push_back(g);

        const NetworkCase again = parse_case(write_case(net));
        CHECK(cases_equal(net, again));
    }
}

TEST_CASE("tap sentinel 0 survives the round trip") {
    NetworkCase net = parse_case(kTinyCase);
    CHECK(net.branches[0].tap == 0.0);
    const NetworkCase again = parse_case(write_case(net));
    CHECK(again.branches[0].tap == 0.0);
}

TEST_CASE("writer does not validate connectivity") {
    std::string disconnected = kTinyCase;
    disconnected.replace(disconnected.find("mpc.branch = [\n\t1\t2"), std::string::npos,
                         "mpc.branch = [\n];\n");
    const NetworkCase net = parse_case(disconnected);
    CHECK_FALSE(is_connected(net));
    const std::string text = write_case(net);  // must not throw
    CHECK(parse_case(text).buses.size() == 2);
}

TEST_CASE("non-consecutive bus ids get a dense index map") {
    std::string gaps = kTinyCase;
    // Rename bus 2 -> 118 everywhere it appears.
    gaps.replace(gaps.find("\t2\t1\t10"), 2, "\t118");
    gaps.replace(gaps.find("\t1\t2\t0.01"), 4, "\t1\t118");
    const NetworkCase net = parse_case(gaps);
    CHECK(net.buses.size() == 2);
    CHECK(net.index_of(1) == 0);
    CHECK(net.index_of(118) == 1);
    CHECK_THROWS_AS(net.index_of(2), ValidationError);
    CHECK(is_connected(net));
}

TEST_CASE("parse is deterministic") {
    const std::string text = read_file(data_path("case14.m"));
    CHECK(cases_equal(parse_case(text), parse_case(text), 0.0));
}

TEST_CASE("fuzzed inputs never crash the parser") {
    const std::string base = read_file(data_path("case14.m"));
    Rng rng2(0x5eed);
    std::size_t parsed_ok = 0, rejected = 0;
    for (int iter = 0; iter < 2000; ++iter) {
        std::string mutated = base;
        const int edits = 1 + static_cast<int>(rng2.uniform() * 8);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = static_cast<std::size_t>(rng2.uniform() * mutated.size());
            switch (static_cast<int>(rng2.uniform() * 4)) {
                case 0: mutated[pos] = static_cast<char>(rng2.next_u64() & 0xff); break;
                case 1: mutated.erase(pos, 1 + static_cast<std::size_t>(rng2.uniform() * 40)); break;
                case 2: mutated.insert(pos, 1, static_cast<char>(rng2.next_u64() & 0xff)); break;
                default: mutated.resize(pos); break;
            }
            if (mutated.empty()) mutated = "x";
        }
        try {
            (void)parse_case(mutated);
            ++parsed_ok;
        } catch (const Error&) {
            ++rejected;
        }
    }
    CHECK(parsed_ok + rejected == 2000);
}
