#pragma once

#include <string>
#include <vector>

#include "mcsforge/diversity.hpp"

namespace mcsforge {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

// self-contained SVG line plot with axes, ticks, and a legend
std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          int width = 720, int height = 440);

// annotated heatmap of a K x K matrix (row = AHT-side policy, col = teammate)
std::string svg_heatmap(const ReturnMatrix& matrix, const std::vector<std::string>& labels,
                        const std::string& title, int cell_size = 56);

}  // namespace mcsforge
