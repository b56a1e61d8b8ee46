#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace smallgain {

/// Tensor-product sampling grid over a box. `steps[d]` is the number of
/// points along dimension d. A closed grid includes both faces; an open grid
/// samples cell midpoints so no point touches the boundary.
struct BoxGrid {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> steps;
  bool open = false;

  std::size_t dim() const { return lo.size(); }

  std::size_t size() const {
    std::size_t total = 1;
    for (auto s : steps) total *= s;
    return total;
  }

  void validate() const {
    if (lo.size() != hi.size() || lo.size() != steps.size() || lo.empty())
      throw std::invalid_argument("BoxGrid: lo, hi, steps must have equal nonzero length");
    for (std::size_t d = 0; d < lo.size(); ++d) {
      if (!(lo[d] <= hi[d])) throw std::invalid_argument("BoxGrid: lo > hi");
      if (steps[d] == 0) throw std::invalid_argument("BoxGrid: zero steps");
    }
  }

  double coordinate(std::size_t d, std::size_t i) const {
    if (open) return lo[d] + (hi[d] - lo[d]) * (static_cast<double>(i) + 0.5) / static_cast<double>(steps[d]);
    if (steps[d] == 1) return 0.5 * (lo[d] + hi[d]);
    return lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) / static_cast<double>(steps[d] - 1);
  }

  /// Writes the flat index's point into `out` (first dimension varies slowest).
  void point(std::size_t flat, std::span<double> out) const {
    for (std::size_t d = dim(); d-- > 0;) {
      out[d] = coordinate(d, flat % steps[d]);
      flat /= steps[d];
    }
  }

  static BoxGrid square(double lo, double hi, std::size_t steps, bool open = false) {
    return BoxGrid{{lo, lo}, {hi, hi}, {steps, steps}, open};
  }
};

}  // namespace smallgain
