#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smallgain {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "black";
  double width = 1.5;
  std::string label;
};

/// Circle in data coordinates; radius in data units along x.
struct PlotCircle {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
  std::string stroke = "black";
  std::string fill = "none";
  double width = 1.0;
};

/// Marker with a fixed pixel radius.
struct PlotMarker {
  double x = 0.0;
  double y = 0.0;
  double radius_px = 3.0;
  std::string stroke = "black";
  std::string fill = "none";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  bool equal_aspect = false;
  int width_px = 640;
  int height_px = 480;
  std::vector<PlotSeries> series;
  std::vector<PlotCircle> circles;
  std::vector<PlotMarker> markers;
};

/// Deterministic SVG text (fixed 3-decimal pixel coordinates).
std::string render_svg(const Plot& plot);

}  // namespace smallgain
