#include "smallgain/scalar_fn.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <memory>
#include <utility>

namespace smallgain {

ScalarFn::ScalarFn() : ScalarFn([](double s) { return s; }, Interval{}, "id") {}

ScalarFn::ScalarFn(Eval eval, Interval domain, std::string label)
    : eval_(std::move(eval)), domain_(domain), label_(std::move(label)) {
  if (!eval_) throw std::invalid_argument("ScalarFn: empty evaluation callback");
  if (!(domain_.lo <= domain_.hi)) throw std::invalid_argument("ScalarFn: empty domain");
}

double ScalarFn::operator()(double s) const {
  if (!domain_.contains(s))
    throw EvaluationError(fmt::format("{}: point {} outside domain [{}, {}]", label_, s, domain_.lo,
                                      domain_.hi),
                          s);
  const double value = eval_(s);
  if (!std::isfinite(value))
    throw EvaluationError(fmt::format("{}: non-finite value at {}", label_, s), s);
  return value;
}

ScalarFn ScalarFn::identity(Interval domain) {
  return ScalarFn([](double s) { return s; }, domain, "id");
}

ScalarFn ScalarFn::linear(double slope, Interval domain) {
  return ScalarFn([slope](double s) { return slope * s; }, domain, fmt::format("{}*s", slope));
}

ScalarFn ScalarFn::zero(Interval domain) {
  return ScalarFn([](double) { return 0.0; }, domain, "0");
}

ScalarFn ScalarFn::from_samples(std::vector<double> xs, std::vector<double> ys, std::string label) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("from_samples: need at least two (x, y) pairs");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("from_samples: xs not strictly increasing");
    if (ys[i] < ys[i - 1]) throw MonotonicityError("from_samples: ys decrease");
  }
  const Interval domain{xs.front(), xs.back()};
  auto data = std::make_shared<const std::pair<std::vector<double>, std::vector<double>>>(
      std::move(xs), std::move(ys));
  return ScalarFn(
      [data](double s) {
        const auto& [x, y] = *data;
        auto it = std::upper_bound(x.begin(), x.end(), s);
        if (it == x.begin()) return y.front();
        if (it == x.end()) return y.back();
        const auto j = static_cast<std::size_t>(it - x.begin());
        const double t = (s - x[j - 1]) / (x[j] - x[j - 1]);
        return y[j - 1] + t * (y[j] - y[j - 1]);
      },
      domain, std::move(label));
}

ScalarFn compose(const ScalarFn& f, const ScalarFn& g) {
  return ScalarFn([f, g](double s) { return f(g(s)); }, g.domain(), f.label() + "∘" + g.label());
}

double invert_on_interval(const ScalarFn& f, Interval interval, double y, double tol) {
  double lo = interval.lo;
  double hi = interval.hi;
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo > f_hi)
    throw MonotonicityError(fmt::format("invert_on_interval: f({}) > f({})", lo, hi));
  if (y < f_lo - tol || y > f_hi + tol)
    throw OutOfRangeError(
        fmt::format("invert_on_interval: {} outside [{}, {}]", y, f_lo, f_hi));
  if (std::abs(f_lo - y) <= tol) return lo;
  if (std::abs(f_hi - y) <= tol) return hi;

  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid < f_lo || f_mid > f_hi)
      throw MonotonicityError(
          fmt::format("invert_on_interval: f({}) = {} leaves bracket [{}, {}]", mid, f_mid, f_lo, f_hi));
    if (std::abs(f_mid - y) <= tol) return mid;
    if (f_mid < y) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return (y - f_lo) <= (f_hi - y) ? lo : hi;
}

double generalized_inverse(const std::function<double(double)>& f, Interval interval, double y,
                           double x_tol) {
  double lo = interval.lo;
  if (f(lo) >= y) return lo;
  double hi = interval.hi;
  if (!std::isfinite(hi)) {
    double step = std::max(1.0, std::abs(lo));
    hi = lo + step;
    for (int i = 0; i < 1100 && f(hi) < y; ++i) {
      lo = hi;
      step *= 2.0;
      hi = lo + step;
    }
  }
  if (f(hi) < y)
    throw OutOfRangeError(fmt::format("generalized_inverse: {} not reached on [{}, {}]", y, interval.lo, hi));
  while (hi - lo > x_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) >= y)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

ClassKCheck is_class_k(const ScalarFn& f, double grid_step, double sample_hi, double zero_tol) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("is_class_k: grid_step must be positive");
  const double lo = f.domain().lo;
  const double hi = std::min(f.domain().hi, sample_hi);
  if (!std::isfinite(hi)) throw std::invalid_argument("is_class_k: unbounded sampling range");

  ClassKCheck result;
  result.grid_step = grid_step;
  double prev = f(lo);
  if (lo == 0.0 && std::abs(prev) > zero_tol) {
    result.violation = std::make_pair(0.0, 0.0);
    return result;
  }
  double s_prev = lo;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / grid_step));
  for (std::size_t k = 1; k <= count; ++k) {
    const double s = std::min(lo + static_cast<double>(k) * grid_step, hi);
    const double value = f(s);
    if (!(value > prev)) {
      result.violation = std::make_pair(s_prev, s);
      return result;
    }
    prev = value;
    s_prev = s;
  }
  result.ok = true;
  return result;
}

double small_gain_residual(const ScalarFn& gamma_12, const ScalarFn& gamma_21, double s) {
  return gamma_12(gamma_21(s)) - s;
}

namespace {

// Bisects between a point with phi >= 0 and a point with phi < 0 and returns
// the non-negative end, so phi(s) = 0 ties stay outside every interval.
double refine_boundary(const ScalarFn& g12, const ScalarFn& g21, double nonneg, double neg,
                       double tol) {
  while (std::abs(neg - nonneg) > tol) {
    const double mid = 0.5 * (nonneg + neg);
    if (mid == nonneg || mid == neg) break;
    if (small_gain_residual(g12, g21, mid) < 0.0)
      neg = mid;
    else
      nonneg = mid;
  }
  return nonneg;
}

}  // namespace

SgcAnalysis find_sgc_intervals(const ScalarFn& gamma_12, const ScalarFn& gamma_21,
                               double scan_bound, const SgcOptions& options) {
  if (!(scan_bound > 0.0)) throw std::invalid_argument("find_sgc_intervals: scan_bound must be positive");
  const double step = options.grid_step.value_or(1e-3 * scan_bound);
  if (!(step > 0.0)) throw std::invalid_argument("find_sgc_intervals: grid_step must be positive");
  if (!(options.refine_tol > 0.0)) throw std::invalid_argument("find_sgc_intervals: refine_tol must be positive");

  const auto cells = static_cast<std::size_t>(std::ceil(scan_bound / step - 1e-9));
  std::vector<double> grid(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) grid[j] = std::min(static_cast<double>(j) * step, scan_bound);

  std::vector<char> negative(grid.size());
  for_each_index(grid.size(), options.exec, [&](std::size_t j) {
    negative[j] = small_gain_residual(gamma_12, gamma_21, grid[j]) < 0.0 ? 1 : 0;
  });

  SgcAnalysis analysis;
  analysis.scan_bound = scan_bound;
  analysis.grid_step = step;
  analysis.refine_tol = options.refine_tol;

  std::size_t j = 0;
  while (j < grid.size()) {
    if (!negative[j]) {
      ++j;
      continue;
    }
    const std::size_t first = j;
    while (j + 1 < grid.size() && negative[j + 1]) ++j;
    const std::size_t last = j;
    ++j;

    SgcInterval interval;
    // A run starting at the grid origin has no non-negative left neighbour.
    interval.lo = first == 0 ? grid[0]
                             : refine_boundary(gamma_12, gamma_21, grid[first - 1], grid[first],
                                               options.refine_tol);
    interval.lo_residual = small_gain_residual(gamma_12, gamma_21, interval.lo);
    if (last + 1 == grid.size()) {
      interval.hi = scan_bound;
      interval.right_open = true;
    } else {
      interval.hi = refine_boundary(gamma_12, gamma_21, grid[last + 1], grid[last], options.refine_tol);
    }
    interval.hi_residual = small_gain_residual(gamma_12, gamma_21, interval.hi);
    analysis.intervals.push_back(interval);
  }
  return analysis;
}

}  // namespace smallgain
