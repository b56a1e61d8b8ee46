#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "smallgain/density.hpp"
#include "smallgain/iss_model.hpp"
#include "smallgain/scalar_fn.hpp"

namespace smallgain::example {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPiSq = 2.0 * kPi * kPi;
inline constexpr double kDoubleEpsilon = 2.220446049250313e-16;

/// Parameters of the two-subsystem staircase example.
struct ExampleParams {
  static constexpr int kInfinite = -1;

  int n = 2;  // number of tanh steps; kInfinite for n = inf
  double u1_bound = 0.0;
  double u2_bound = 0.0;
  double precision = kDoubleEpsilon;  // rounding threshold p
  /// For n = inf: summands centred beyond this range (plus the saturation
  /// width) are dropped.
  double eval_range = 200.0;

  bool infinite() const { return n == kInfinite; }
  /// a = (4 pi^2 n + 3 pi^2) / 2, or +inf for n = inf.
  double a() const;
  /// Number of summands actually evaluated.
  int terms() const;
  InputBounds inputs() const { return {u1_bound, u2_bound}; }
  /// u_i / (a + 1); zero for n = inf.
  double input_scale(double u) const;
  void validate() const;
};

double g(double r, const ExampleParams& params);
double g_prime(double r, const ExampleParams& params);
double h(double r, const ExampleParams& params);

/// Right-hand side of subsystem i with input bound u_i.
double f_i(int i, double x_i, double x_other, double u_i, const ExampleParams& params);
/// Same with u_i taken from params.
double f_i(int i, double x_i, double x_other, const ExampleParams& params);

/// r* = artanh(1 - p): beyond it tanh(r) - 1 rounds to zero.
double rounding_threshold(double p);
/// 1 - |tanh(arg)| < p.
bool tanh_saturated(double arg, double p);
/// Every tanh term of g is within p of saturation and the quadratic branch is
/// not active.
bool numerically_constant(double r, const ExampleParams& params);

struct RegionScan {
  double scan_hi = 0.0;
  double grid_step = 0.0;  // defaults to 1e-3 * scan_hi when <= 0
  double refine_tol = 1e-12;
};

/// Closed intervals of [0, scan_hi] where g is numerically constant.
std::vector<Interval> numerically_constant_regions(const ExampleParams& params, RegionScan scan);
/// Complement in [0, scan_hi]: the intervals where g is strictly numerically
/// increasing.
std::vector<Interval> increasing_intervals(const ExampleParams& params, RegionScan scan);

/// rho(x) = exp(-(x_1 + x_2)).
double rho(std::span<const double> x);
DensityFn density();

/// r_k = 2 pi^2 k + pi^2 for k = 0..n (for n = inf, up to eval_range).
std::vector<double> equilibria(const ExampleParams& params);
/// Origin followed by (r_k, r_k).
std::vector<std::vector<double>> equilibrium_states(const ExampleParams& params);

/// gamma(s) = g^{-1}(h(s) / (1 - delta)), with g^{-1} the generalized inverse.
ScalarFn interconnection_gain(const ExampleParams& params, double delta);
/// g~(s) = g(s) s / (1 + s), a class-K_inf lower bound of |g| on s >= 0.
ScalarFn g_lower_bound(const ExampleParams& params);

/// m(r) = (25 + eps)|g(r)| - 25 h(r).
double m_function(double r, const ExampleParams& params, double epsilon);

/// The interconnection with V_i = |x_i|, the gain construction above,
/// alpha_i = delta * g~ and analytic div f.
SystemModel make_model(const ExampleParams& params, double delta);

}  // namespace smallgain::example
