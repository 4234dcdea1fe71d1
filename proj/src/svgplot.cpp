#include "lsebu/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "lsebu/errors.hpp"

namespace lsebu {

namespace {

struct FigureRow {
    bool real_part = true;
    int bus_id = 0;
    double truth = 0.0;
    std::optional<double> convex;
    std::optional<double> glfp;
    std::optional<double> lower, upper;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_opt(const std::string& s, std::size_t line_no) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v))
            throw ParseError("bad numeric field '" + s + "'", line_no, 1);
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("bad numeric field '" + s + "'", line_no, 1);
    }
}

std::vector<FigureRow> parse_figure_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty figure CSV", 1, 1);
    const auto header = split_csv_line(line);
    if (header.size() < 8 || header[0] != "component_index")
        throw ParseError("unexpected figure CSV header", 1, 1);

    std::vector<FigureRow> rows;
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        if (line.empty()) {
            ++line_no;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw ParseError("expected 8 CSV fields", line_no, 1);
        FigureRow r;
        if (f[1] == "real") r.real_part = true;
        else if (f[1] == "imag") r.real_part = false;
        else throw ParseError("part must be real or imag, got '" + f[1] + "'", line_no, 2);
        r.bus_id = static_cast<int>(*parse_opt(f[2], line_no));
        r.truth = *parse_opt(f[3], line_no);
        r.convex = parse_opt(f[4], line_no);
        r.glfp = parse_opt(f[5], line_no);
        r.lower = parse_opt(f[6], line_no);
        r.upper = parse_opt(f[7], line_no);
        rows.push_back(r);
        ++line_no;
    }
    if (rows.empty()) throw ParseError("figure CSV has no data rows", 2, 1);
    return rows;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void render_panel(std::ostringstream& svg, const std::vector<FigureRow>& rows, double ox, double oy,
                  double w, double h, const char* title) {
    double lo = 1e300, hi = -1e300;
    auto consider = [&](std::optional<double> v) {
        if (v) {
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
        }
    };
    for (const FigureRow& r : rows) {
        consider(r.truth);
        consider(r.convex);
        consider(r.glfp);
        consider(r.lower);
        consider(r.upper);
    }
    if (hi <= lo) {
        hi = lo + 1.0;
        lo -= 1.0;
    }
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;

    const std::size_t n = rows.size();
    auto xpos = [&](std::size_t i) {
        return ox + w * (n == 1 ? 0.5 : 0.06 + 0.88 * static_cast<double>(i) / (n - 1));
    };
    auto ypos = [&](double v) { return oy + h - h * (v - lo) / (hi - lo); };

    svg << "<g class=\"panel\">\n";
    svg << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"white\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << num(ox + w / 2) << "\" y=\"" << num(oy - 8)
        << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";

    // Bound band as a closed polygon, drawn first so markers sit on top.
    if (std::all_of(rows.begin(), rows.end(),
                    [](const FigureRow& r) { return r.lower && r.upper; })) {
        svg << "<polygon class=\"band\" fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < n; ++i) svg << num(xpos(i)) << ',' << num(ypos(*rows[i].upper)) << ' ';
        for (std::size_t i = n; i-- > 0;) svg << num(xpos(i)) << ',' << num(ypos(*rows[i].lower)) << ' ';
        svg << "\"/>\n";
    }

    // x ticks: one per bus when few, a subset otherwise.
    const std::size_t step = n <= 20 ? 1 : (n + 9) / 10;
    for (std::size_t i = 0; i < n; i += step) {
        svg << "<g class=\"tick\"><line x1=\"" << num(xpos(i)) << "\" y1=\"" << num(oy + h)
            << "\" x2=\"" << num(xpos(i)) << "\" y2=\"" << num(oy + h + 4)
            << "\" stroke=\"#444\"/><text x=\"" << num(xpos(i)) << "\" y=\"" << num(oy + h + 16)
            << "\" text-anchor=\"middle\" font-size=\"10\">" << rows[i].bus_id << "</text></g>\n";
    }

    for (std::size_t i = 0; i < n; ++i) {
        svg << "<path class=\"true-marker\" stroke=\"#000\" stroke-width=\"1.2\" d=\"M "
            << num(xpos(i) - 3) << ' ' << num(ypos(rows[i].truth) - 3) << " l 6 6 m 0 -6 l -6 6\"/>\n";
        if (rows[i].convex)
            svg << "<circle class=\"convex-marker\" cx=\"" << num(xpos(i)) << "\" cy=\""
                << num(ypos(*rows[i].convex)) << "\" r=\"2.6\" fill=\"none\" stroke=\"#d62728\"/>\n";
        if (rows[i].glfp)
            svg << "<rect class=\"glfp-marker\" x=\"" << num(xpos(i) - 2.4) << "\" y=\""
                << num(ypos(*rows[i].glfp) - 2.4)
                << "\" width=\"4.8\" height=\"4.8\" fill=\"none\" stroke=\"#2ca02c\"/>\n";
    }
    svg << "</g>\n";
}

}  // namespace

std::string render_bounds_svg(const std::string& figure_csv_text) {
    const std::vector<FigureRow> rows = parse_figure_csv(figure_csv_text);
    std::vector<FigureRow> re, im;
    for (const FigureRow& r : rows) (r.real_part ? re : im).push_back(r);
    if (re.empty() || im.empty())
        throw ParseError("figure CSV must carry both real and imag components", 2, 1);

    const double width = 900, panel_h = 260;
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << 2 * panel_h + 110 << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    render_panel(svg, re, 40, 30, width - 80, panel_h, "Real part (p.u.)");
    render_panel(svg, im, 40, panel_h + 90, width - 80, panel_h, "Imaginary part (p.u.)");
    svg << "<text x=\"" << width / 2
        << "\" y=\"" << 2 * panel_h + 100
        << "\" text-anchor=\"middle\" font-size=\"11\">band: interval bounds, x: true state, "
           "circle: convex estimate, square: glfp estimate</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void plot_bounds(const std::string& figure_csv_path, const std::string& out_svg_path) {
    std::ifstream in(figure_csv_path, std::ios::binary);
    if (!in) throw IoError("cannot open figure CSV: " + figure_csv_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string svg = render_bounds_svg(buf.str());
    std::ofstream out(out_svg_path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + out_svg_path);
    out << svg;
    if (!out) throw IoError("write failed: " + out_svg_path);
}

}  // namespace lsebu
