#include "smallgain/example_system.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace smallgain::example {

namespace {

double sign(double r) { return static_cast<double>((r > 0.0) - (r < 0.0)); }

// glibc returns exactly +-1 past |x| = 22; skipping the call is bit-identical.
double tanh_sat(double x) {
  if (x >= 22.0) return 1.0;
  if (x <= -22.0) return -1.0;
  return std::tanh(x);
}

double sech_sq(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

}  // namespace

double ExampleParams::a() const {
  if (infinite()) return kInf;
  return (4.0 * kPi * kPi * n + 3.0 * kPi * kPi) / 2.0;
}

int ExampleParams::terms() const {
  if (!infinite()) return n;
  return static_cast<int>(std::ceil((eval_range + rounding_threshold(precision)) / kTwoPiSq)) + 1;
}

double ExampleParams::input_scale(double u) const {
  if (infinite()) return 0.0;
  return u / (a() + 1.0);
}

void ExampleParams::validate() const {
  if (n < 0 && n != kInfinite) throw std::invalid_argument("ExampleParams: n must be >= 0 or infinite");
  if (!(u1_bound >= 0.0) || !(u2_bound >= 0.0))
    throw std::invalid_argument("ExampleParams: input bounds must be nonnegative");
  if (!(precision > 0.0 && precision < 1.0))
    throw std::invalid_argument("ExampleParams: precision must lie in (0, 1)");
}

double g(double r, const ExampleParams& params) {
  const double s = sign(r);
  const double a = params.a();
  if (std::abs(r) <= a) {
    double value = tanh_sat(2.0 * r);
    const int terms = params.terms();
    for (int i = 1; i <= terms; ++i) value += s * (1.0 + s * tanh_sat(2.0 * (r - s * kTwoPiSq * i)));
    return value;
  }
  const double d = r - s * a;
  return s * ((2.0 * params.n + 1.0) + d * d);
}

double g_prime(double r, const ExampleParams& params) {
  const double s = sign(r);
  const double a = params.a();
  if (std::abs(r) <= a) {
    double value = 2.0 * sech_sq(2.0 * r);
    const int terms = params.terms();
    for (int i = 1; i <= terms; ++i) value += s * s * 2.0 * sech_sq(2.0 * (r - s * kTwoPiSq * i));
    return value;
  }
  return 2.0 * (std::abs(r) - a);
}

double h(double r, const ExampleParams& params) {
  const double sn = std::sin(r / (2.0 * kPi));
  const double base = sn * sn;
  double value = base;
  const int terms = params.terms();
  for (int i = 1; i <= terms; ++i) value += (tanh_sat(r - kTwoPiSq * i) + 1.0) * base;
  return value;
}

double f_i(int, double x_i, double x_other, double u_i, const ExampleParams& params) {
  const double c = params.input_scale(u_i);
  return -(25.0 + c) * g(x_i, params) + 25.0 * h(x_other, params) + c * c;
}

double f_i(int i, double x_i, double x_other, const ExampleParams& params) {
  return f_i(i, x_i, x_other, i == 1 ? params.u1_bound : params.u2_bound, params);
}

double rounding_threshold(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("rounding_threshold: p must lie in (0, 1)");
  return std::atanh(1.0 - p);
}

bool tanh_saturated(double arg, double p) {
  // 1 - |tanh(x)| = 2 / (exp(2|x|) + 1), evaluated without cancellation.
  return 2.0 / (std::exp(2.0 * std::abs(arg)) + 1.0) < p;
}

bool numerically_constant(double r, const ExampleParams& params) {
  const double x = std::abs(r);
  if (x > params.a()) return false;
  const double p = params.precision;
  if (!tanh_saturated(2.0 * x, p)) return false;
  const int terms = params.terms();
  for (int i = 1; i <= terms; ++i)
    if (!tanh_saturated(2.0 * (x - kTwoPiSq * i), p)) return false;
  return true;
}

std::vector<Interval> numerically_constant_regions(const ExampleParams& params, RegionScan scan) {
  params.validate();
  if (!(scan.scan_hi > 0.0)) throw std::invalid_argument("numerically_constant_regions: scan_hi must be positive");
  const double step = scan.grid_step > 0.0 ? scan.grid_step : 1e-3 * scan.scan_hi;
  const auto cells = static_cast<std::size_t>(std::ceil(scan.scan_hi / step - 1e-9));
  auto at = [&](std::size_t j) { return std::min(static_cast<double>(j) * step, scan.scan_hi); };
  auto refine = [&](double inside, double outside) {
    while (std::abs(outside - inside) > scan.refine_tol) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) break;
      (numerically_constant(mid, params) ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };

  std::vector<Interval> regions;
  std::size_t j = 0;
  while (j <= cells) {
    if (!numerically_constant(at(j), params)) {
      ++j;
      continue;
    }
    const std::size_t first = j;
    while (j + 1 <= cells && numerically_constant(at(j + 1), params)) ++j;
    const std::size_t last = j;
    ++j;
    Interval region;
    region.lo = first == 0 ? 0.0 : refine(at(first), at(first - 1));
    region.hi = last == cells ? scan.scan_hi : refine(at(last), at(last + 1));
    regions.push_back(region);
  }
  return regions;
}

std::vector<Interval> increasing_intervals(const ExampleParams& params, RegionScan scan) {
  const auto constant = numerically_constant_regions(params, scan);
  std::vector<Interval> increasing;
  double start = 0.0;
  for (const auto& region : constant) {
    if (region.lo > start) increasing.push_back({start, region.lo});
    start = region.hi;
  }
  if (start < scan.scan_hi) increasing.push_back({start, scan.scan_hi});
  return increasing;
}

double rho(std::span<const double> x) { return std::exp(-(x[0] + x[1])); }

DensityFn density() {
  DensityFn d;
  d.rho = [](std::span<const double> x) { return rho(x); };
  d.grad_rho = [](std::span<const double> x, std::span<double> grad) {
    const double value = rho(x);
    grad[0] = -value;
    grad[1] = -value;
  };
  d.label = "exp(-(x1+x2))";
  return d;
}

std::vector<double> equilibria(const ExampleParams& params) {
  std::vector<double> points;
  const int last = params.infinite() ? params.terms() : params.n;
  for (int k = 0; k <= last; ++k) {
    const double r = kTwoPiSq * k + kPi * kPi;
    if (params.infinite() && r > params.eval_range) break;
    points.push_back(r);
  }
  return points;
}

std::vector<std::vector<double>> equilibrium_states(const ExampleParams& params) {
  std::vector<std::vector<double>> states{{0.0, 0.0}};
  for (double r : equilibria(params)) states.push_back({r, r});
  return states;
}

namespace {

// Upper end of a bracket on which g reaches y.
double g_bracket(const ExampleParams& params, double y) {
  if (params.infinite()) return kInf;
  return params.a() + std::sqrt(std::max(0.0, y - (2.0 * params.n + 1.0))) + 1.0;
}

double g_inverse(const ExampleParams& params, double y) {
  return generalized_inverse([&params](double r) { return g(r, params); },
                             Interval{0.0, g_bracket(params, y)}, y, 1e-12);
}

}  // namespace

ScalarFn interconnection_gain(const ExampleParams& params, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return ScalarFn([params, delta](double s) { return g_inverse(params, h(s, params) / (1.0 - delta)); },
                  Interval{}, fmt::format("g^-1(h/(1-{}))", delta));
}

ScalarFn g_lower_bound(const ExampleParams& params) {
  return ScalarFn([params](double s) { return g(s, params) * s / (1.0 + s); }, Interval{},
                  "g(s)s/(1+s)");
}

double m_function(double r, const ExampleParams& params, double epsilon) {
  return (25.0 + epsilon) * std::abs(g(r, params)) - 25.0 * h(r, params);
}

SystemModel make_model(const ExampleParams& params, double delta) {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");

  SystemModel model;
  model.n1 = 1;
  model.n2 = 1;
  model.f1 = [params](std::span<const double> x1, std::span<const double> x2, double u, std::span<double> dx) {
    dx[0] = f_i(1, x1[0], x2[0], u, params);
  };
  model.f2 = [params](std::span<const double> x1, std::span<const double> x2, double u, std::span<double> dx) {
    dx[0] = f_i(2, x2[0], x1[0], u, params);
  };
  model.v1 = StorageFunction::abs_value();
  model.v2 = StorageFunction::abs_value();
  model.alpha_lo_1 = model.alpha_hi_1 = ScalarFn::identity();
  model.alpha_lo_2 = model.alpha_hi_2 = ScalarFn::identity();

  model.gamma_12 = interconnection_gain(params, delta);
  model.gamma_21 = model.gamma_12;

  // Splits the remaining delta budget: under both gates dV/dt <= -12.5 delta g(V).
  model.gamma_1 = ScalarFn(
      [params, delta](double u) {
        const double c = params.input_scale(u);
        return g_inverse(params, c * c / (12.5 * delta));
      },
      Interval{}, "g^-1((u/(a+1))^2/(12.5 delta))");
  model.gamma_2 = model.gamma_1;

  const ScalarFn lower = g_lower_bound(params);
  model.alpha_1 = ScalarFn([lower, delta](double s) { return delta * lower(s); }, Interval{},
                           fmt::format("{}*g~", delta));
  model.alpha_2 = model.alpha_1;

  model.divergence_f = [params](std::span<const double> x, const InputBounds& u) {
    return -(25.0 + params.input_scale(u.u1)) * g_prime(x[0], params) -
           (25.0 + params.input_scale(u.u2)) * g_prime(x[1], params);
  };
  model.label = params.infinite() ? "example(n=inf)" : fmt::format("example(n={})", params.n);
  return model;
}

}  // namespace smallgain::example
