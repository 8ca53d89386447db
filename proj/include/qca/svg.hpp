#pragma once

// Minimal deterministic SVG emitter for the two figure kinds the CLI ships:
// multi-series line plots (optionally log-log, with labelled horizontal
// reference lines) and a gridded heatmap with a colorbar. No external
// renderer; output is plain markup so diffs stay reviewable.

#include <string>
#include <vector>

#include "qca/common.hpp"

namespace qca::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;       // empty = palette color by index
  bool markers = false;
};

struct RefLine {
  double y = 0.0;
  std::string label;
};

struct LinePlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<RefLine> ref_lines;
  int width = 860;
  int height = 520;
};

// Renders series as polylines over computed axes. Non-finite points (and
// non-positive ones on log axes) break the polyline rather than distorting it.
std::string line_plot(const std::vector<Series>& series,
                      const LinePlotOptions& opt);

struct HeatmapOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 860;
  int height = 520;
};

// values is row-major: values[iy * x.size() + ix]; NaN cells render grey.
std::string heatmap(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& values,
                    const HeatmapOptions& opt);

void write_svg_file(const std::string& markup, const std::string& path);

}  // namespace qca::svg
