#ifndef LSEBU_SVGPLOT_HPP
#define LSEBU_SVGPLOT_HPP

#include <string>

namespace lsebu {

// Renders a figure CSV (as written by the bench module) into a self-contained
// SVG: one panel for the real parts, one for the imaginary parts, each with
// the bound band plus true/estimate markers per bus.
std::string render_bounds_svg(const std::string& figure_csv_text);

void plot_bounds(const std::string& figure_csv_path, const std::string& out_svg_path);

}  // namespace lsebu

#endif
