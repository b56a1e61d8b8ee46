#include "smallgain/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace smallgain {

namespace {

constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 35.0;
constexpr double kMarginBottom = 45.0;

std::pair<double, double> data_range(const Plot& plot, bool along_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto take = [&](double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  for (const auto& s : plot.series)
    for (double v : along_x ? s.x : s.y) take(v);
  for (const auto& c : plot.circles) {
    take((along_x ? c.cx : c.cy) - c.r);
    take((along_x ? c.cx : c.cy) + c.r);
  }
  for (const auto& m : plot.markers) take(along_x ? m.x : m.y);
  if (!(lo <= hi)) return {0.0, 1.0};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.02 * (hi - lo);
  return {lo - pad, hi + pad};
}

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  auto [x0, x1] = plot.x_range.value_or(data_range(plot, true));
  auto [y0, y1] = plot.y_range.value_or(data_range(plot, false));
  const double w = plot.width_px, h = plot.height_px;
  double pw = w - kMarginLeft - kMarginRight;
  double ph = h - kMarginTop - kMarginBottom;
  double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  if (plot.equal_aspect) {
    sx = sy = std::min(sx, sy);
    pw = sx * (x1 - x0);
    ph = sy * (y1 - y0);
  }
  auto px = [&](double x) { return kMarginLeft + (x - x0) * sx; };
  auto py = [&](double y) { return kMarginTop + ph - (y - y0) * sy; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      plot.width_px, plot.height_px, plot.width_px, plot.height_px);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", plot.width_px, plot.height_px);
  out += fmt::format("<defs><clipPath id=\"plot\"><rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\"/></clipPath></defs>\n",
                     kMarginLeft, kMarginTop, pw, ph);

  const double xs = nice_step(x1 - x0), ys = nice_step(y1 - y0);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    const double v = std::abs(t) < 1e-12 * xs ? 0.0 : t;
    out += fmt::format("<line x1=\"{0:.3f}\" y1=\"{1:.3f}\" x2=\"{0:.3f}\" y2=\"{2:.3f}\" stroke=\"#dddddd\"/>\n", px(v), kMarginTop, kMarginTop + ph);
    out += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"11\" text-anchor=\"middle\">{:g}</text>\n", px(v), kMarginTop + ph + 15, v);
  }
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    const double v = std::abs(t) < 1e-12 * ys ? 0.0 : t;
    out += fmt::format("<line x1=\"{0:.3f}\" y1=\"{1:.3f}\" x2=\"{2:.3f}\" y2=\"{1:.3f}\" stroke=\"#dddddd\"/>\n", kMarginLeft, py(v), kMarginLeft + pw);
    out += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"11\" text-anchor=\"end\">{:g}</text>\n", kMarginLeft - 5, py(v) + 4, v);
  }
  out += fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"none\" stroke=\"black\"/>\n",
                     kMarginLeft, kMarginTop, pw, ph);

  out += "<g clip-path=\"url(#plot)\">\n";
  for (const auto& s : plot.series) {
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"{}\"/>\n", s.color, s.width, points);
      points.clear();
    };
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.3f},{:.3f}", px(s.x[k]), py(s.y[k]));
    }
    flush();
  }
  for (const auto& c : plot.circles)
    out += fmt::format("<ellipse cx=\"{:.3f}\" cy=\"{:.3f}\" rx=\"{:.3f}\" ry=\"{:.3f}\" stroke=\"{}\" fill=\"{}\" stroke-width=\"{}\"/>\n",
                       px(c.cx), py(c.cy), c.r * sx, c.r * sy, c.stroke, c.fill, c.width);
  for (const auto& m : plot.markers)
    out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{}\" stroke=\"{}\" fill=\"{}\"/>\n", px(m.x), py(m.y), m.radius_px, m.stroke, m.fill);
  out += "</g>\n";

  double legend_y = kMarginTop + 15;
  for (const auto& s : plot.series) {
    if (s.label.empty()) continue;
    out += fmt::format("<line x1=\"{0:.3f}\" y1=\"{1:.3f}\" x2=\"{2:.3f}\" y2=\"{1:.3f}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       kMarginLeft + pw - 110, legend_y, kMarginLeft + pw - 85, s.color);
    out += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"12\">{}</text>\n", kMarginLeft + pw - 80, legend_y + 4, escape(s.label));
    legend_y += 16;
  }
  out += fmt::format("<text x=\"{:.3f}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n", kMarginLeft + pw / 2, escape(plot.title));
  out += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n", kMarginLeft + pw / 2, kMarginTop + ph + 35, escape(plot.x_label));
  out += fmt::format("<text x=\"15\" y=\"{0:.3f}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {0:.3f})\">{1}</text>\n",
                     kMarginTop + ph / 2, escape(plot.y_label));
  out += "</svg>\n";
  return out;
}

}  // namespace smallgain
