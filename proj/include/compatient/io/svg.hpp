#pragma once

#include <string>
#include <vector>

namespace compatient::io {

struct Trace {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 420;
};

/// Line plot with axes, ticks and a legend. Output depends only on the
/// inputs (fixed-precision coordinates, no timestamps).
std::string line_plot(const PlotSpec& spec, const std::vector<Trace>& traces);

}  // namespace compatient::io
