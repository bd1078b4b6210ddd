#pragma once

#include <string>
#include <vector>

namespace scatterlab::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

/// Self-contained SVG line chart; non-positive values are dropped on log axes.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

}  // namespace scatterlab::svg
