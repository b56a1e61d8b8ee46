#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smallgain/exec.hpp"
#include "smallgain/grid.hpp"
#include "smallgain/scalar_fn.hpp"

namespace smallgain {

/// Sup-norm input bounds |u_1|_inf, |u_2|_inf. Inputs enter the model only
/// through these constants.
struct InputBounds {
  double u1 = 0.0;
  double u2 = 0.0;

  double of(int i) const { return i == 1 ? u1 : u2; }
  double norm() const { return std::hypot(u1, u2); }
};

/// dx_i = f_i(x_1, x_2, u_i).
using SubsystemField = std::function<void(std::span<const double> x1, std::span<const double> x2,
                                          double u, std::span<double> dx)>;

/// Locally Lipschitz storage function V_i. When `directional` is set it gives
/// the derivative of V_i along dx (used in place of a gradient where V_i is
/// not differentiable); otherwise the gradient is taken by central differences.
struct StorageFunction {
  std::function<double(std::span<const double>)> value;
  std::function<double(std::span<const double> x, std::span<const double> dx)> directional;
  std::string label;

  /// V(x) = |x| on a scalar state; derivative along dx is sign(x) * dx.
  static StorageFunction abs_value();
  /// V(x) = 0.5 |x|^2, smooth.
  static StorageFunction half_squared_norm();
};

/// Interconnection of two subsystems with their ISS-Lyapunov data.
/// Immutable after construction; every query is pure.
struct SystemModel {
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  SubsystemField f1;
  SubsystemField f2;
  StorageFunction v1;
  StorageFunction v2;
  ScalarFn alpha_lo_1, alpha_hi_1, alpha_lo_2, alpha_hi_2;
  ScalarFn gamma_12, gamma_21;
  ScalarFn gamma_1, gamma_2;
  ScalarFn alpha_1, alpha_2;
  /// Optional analytic div f(x, u); finite differences are used otherwise.
  std::function<double(std::span<const double> x, const InputBounds& u)> divergence_f;
  std::string label;

  std::size_t dim() const { return n1 + n2; }
  std::span<const double> part(int i, std::span<const double> x) const {
    return i == 1 ? x.first(n1) : x.subspan(n1, n2);
  }
  std::size_t part_dim(int i) const { return i == 1 ? n1 : n2; }

  /// Full vector field f = (f_1, f_2).
  void field(std::span<const double> x, const InputBounds& u, std::span<double> dx) const;
  double storage(int i, std::span<const double> x_i) const { return i == 1 ? v1.value(x_i) : v2.value(x_i); }
  const StorageFunction& storage_fn(int i) const { return i == 1 ? v1 : v2; }
  const ScalarFn& interconnect_gain(int i) const { return i == 1 ? gamma_12 : gamma_21; }
  const ScalarFn& external_gain(int i) const { return i == 1 ? gamma_1 : gamma_2; }
  const ScalarFn& decay(int i) const { return i == 1 ? alpha_1 : alpha_2; }
  const ScalarFn& alpha_lo(int i) const { return i == 1 ? alpha_lo_1 : alpha_lo_2; }
  const ScalarFn& alpha_hi(int i) const { return i == 1 ? alpha_hi_1 : alpha_hi_2; }
};

double euclidean_norm(std::span<const double> x);

struct ModelInvariantReport {
  double origin_residual = 0.0;  // max |f_i(0, 0, 0)|
  std::size_t sandwich_samples = 0;
  std::size_t sandwich_violations = 0;
  bool ok = false;
};

/// Checks f_i(0,0,0) = 0 within `origin_tol` and the storage sandwich
/// alpha_lo_i(|x_i|) <= V_i(x_i) <= alpha_hi_i(|x_i|) on the grid.
ModelInvariantReport validate_model(const SystemModel& model, const BoxGrid& grid,
                                    double origin_tol = 1e-12, double sandwich_tol = 1e-12);

struct IssViolation {
  std::vector<double> x;
  double u = 0.0;
  double vdot = 0.0;
  double bound = 0.0;  // -alpha_i(|x_i|) + slack
};

struct IssLyapunovReport {
  int subsystem = 1;
  BoxGrid grid;
  double u_bound = 0.0;
  std::size_t u_steps = 1;
  double slack_tol = 0.0;
  std::size_t samples = 0;
  std::size_t gated = 0;
  std::size_t violation_count = 0;
  std::vector<IssViolation> violations;  // first `violation_cap`, in grid order
  double worst_margin = kInf;            // min over gated samples of bound - vdot
  std::size_t directional_samples = 0;
  std::size_t nonsmooth_samples = 0;     // directional form at x_i = 0

  bool passed() const { return violation_count == 0; }
};

struct IssCheckOptions {
  double u_bound = 0.0;
  std::size_t u_steps = 1;  // u sampled on [0, u_bound]
  double slack_tol = 1e-9;
  std::size_t violation_cap = 100;
  Execution exec = Execution::parallel;
};

/// Grid check of the ISS-Lyapunov implication for subsystem i:
///   V_i(x_i) >= max{gamma_ij(V_j(x_j)), gamma_i(u)}  =>  dV_i/dt <= -alpha_i(|x_i|).
/// `grid` spans the full state (x_1, x_2).
IssLyapunovReport check_iss_lyapunov(const SystemModel& model, int i, const BoxGrid& grid,
                                     const IssCheckOptions& options = {});

/// Derivative of V_i along f_i at (x, u); sets `directional` when the
/// storage function's directional form was used.
double storage_derivative(const SystemModel& model, int i, std::span<const double> x, double u,
                          bool* directional = nullptr);

enum class RegionKind { a, b, custom };

/// Cap-defined set {x : V_1(x_1) <= v1_cap, V_2(x_2) <= v2_cap}.
struct Region {
  RegionKind kind = RegionKind::custom;
  std::size_t k = 0;
  double v1_cap = 0.0;
  double v2_cap = 0.0;
  bool unbounded = false;

  double cap(int i) const { return i == 1 ? v1_cap : v2_cap; }
};

/// A_k: caps max{M_lo, g12(M_lo)} and max{g21(M_lo), g21(g21(M_lo))}. k is 1-based.
Region region_a(const SgcAnalysis& analysis, const SystemModel& model, std::size_t k);
/// B_k: caps M_hi and g21(M_hi); unbounded when the interval is right-open.
Region region_b(const SgcAnalysis& analysis, const SystemModel& model, std::size_t k);

bool region_contains(const Region& region, const SystemModel& model, std::span<const double> x);

/// sqrt(sum_i max(0, V_i(x_i) - cap_i)^2); for V_i = |x_i| on scalars this is
/// the Euclidean distance to the cap box.
double region_distance(const Region& region, const SystemModel& model, std::span<const double> x);

std::string to_string(RegionKind kind);

}  // namespace smallgain
