#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallgain/exec.hpp"

namespace smallgain {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = kInf;

  bool contains(double s) const { return s >= lo && s <= hi; }
  double width() const { return hi - lo; }
};

/// Thrown when a ScalarFn is evaluated outside its domain or yields a
/// non-finite value. Carries the offending point.
class EvaluationError : public std::domain_error {
 public:
  EvaluationError(const std::string& what, double point)
      : std::domain_error(what), point_(point) {}
  double point() const { return point_; }

 private:
  double point_;
};

class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class MonotonicityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real function of one real variable with a declared domain. Pure and safe
/// to evaluate concurrently.
class ScalarFn {
 public:
  using Eval = std::function<double(double)>;

  /// Identity on [0, inf).
  ScalarFn();
  ScalarFn(Eval eval, Interval domain, std::string label);

  /// Checked evaluation: throws EvaluationError outside the domain or on a
  /// non-finite result.
  double operator()(double s) const;

  const Interval& domain() const { return domain_; }
  const std::string& label() const { return label_; }

  static ScalarFn identity(Interval domain = {});
  static ScalarFn linear(double slope, Interval domain = {});
  static ScalarFn zero(Interval domain = {});

  /// Monotone piecewise-linear interpolation of measured samples.
  /// `xs` strictly increasing, `ys` non-decreasing.
  static ScalarFn from_samples(std::vector<double> xs, std::vector<double> ys, std::string label);

 private:
  Eval eval_;
  Interval domain_;
  std::string label_;
};

/// h(s) = f(g(s)). Domain errors surface at evaluation time.
ScalarFn compose(const ScalarFn& f, const ScalarFn& g);

/// Bisection for x in [lo, hi] with |f(x) - y| <= tol, f increasing.
/// Throws OutOfRangeError if y is outside [f(lo), f(hi)] and
/// MonotonicityError if a bracket value falls outside its endpoint values.
double invert_on_interval(const ScalarFn& f, Interval interval, double y, double tol);

/// Generalized inverse of a non-decreasing f: the smallest x in `interval`
/// with f(x) >= y, located to within `x_tol` and always approached from the
/// right so that f(result) >= y holds. Used where f has exact plateaus.
/// Returns interval.lo when f(lo) >= y; throws OutOfRangeError when
/// f(hi) < y.
double generalized_inverse(const std::function<double(double)>& f, Interval interval, double y,
                           double x_tol);

struct ClassKCheck {
  bool ok = false;
  /// First consecutive grid pair (s_prev, s) that failed strict increase,
  /// or (0, 0) when f(0) != 0.
  std::optional<std::pair<double, double>> violation;
  double grid_step = 0.0;
};

/// Grid certificate for class K on [domain.lo, min(domain.hi, sample_hi)].
ClassKCheck is_class_k(const ScalarFn& f, double grid_step, double sample_hi = kInf,
                       double zero_tol = 1e-9);

struct SgcInterval {
  double lo = 0.0;
  double hi = 0.0;
  /// phi < 0 at the scan bound: the interval may extend past it.
  bool right_open = false;
  /// Residual phi at each refined boundary. Small for a continuous crossing,
  /// order-one when the boundary is a jump of gamma_12 o gamma_21.
  double lo_residual = 0.0;
  double hi_residual = 0.0;
};

/// Intervals where gamma_12(gamma_21(s)) < s, found by a sign scan of
/// phi(s) = gamma_12(gamma_21(s)) - s on a grid with bisection refinement.
struct SgcAnalysis {
  std::vector<SgcInterval> intervals;
  double scan_bound = 0.0;
  double grid_step = 0.0;
  double refine_tol = 0.0;

  std::size_t count() const { return intervals.size(); }
};

struct SgcOptions {
  /// Defaults to 1e-3 * scan_bound when unset.
  std::optional<double> grid_step;
  double refine_tol = 1e-9;
  Execution exec = Execution::parallel;
};

SgcAnalysis find_sgc_intervals(const ScalarFn& gamma_12, const ScalarFn& gamma_21,
                               double scan_bound, const SgcOptions& options = {});

/// phi(s) = gamma_12(gamma_21(s)) - s.
double small_gain_residual(const ScalarFn& gamma_12, const ScalarFn& gamma_21, double s);

}  // namespace smallgain
