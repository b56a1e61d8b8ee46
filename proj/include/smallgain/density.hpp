#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallgain/exec.hpp"
#include "smallgain/grid.hpp"
#include "smallgain/iss_model.hpp"
#include "smallgain/scalar_fn.hpp"

namespace smallgain {

/// Positive density rho with an optional analytic gradient.
struct DensityFn {
  std::function<double(std::span<const double>)> rho;
  std::function<void(std::span<const double>, std::span<double>)> grad_rho;
  std::string label;
};

class PositivityError : public std::domain_error {
 public:
  PositivityError(const std::string& what, std::vector<double> point)
      : std::domain_error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

/// div(rho f)(x, u) = grad rho(x) . f(x, u) + rho(x) div f(x, u).
/// Uses the model's analytic div f and the density's analytic gradient when
/// present, central differences (step 1e-6 (1 + |x_j|)) otherwise.
double divergence(const DensityFn& density, const SystemModel& model, std::span<const double> x,
                  const InputBounds& u);

/// Gate that selects where the density inequality is required.
///  - max_storage:   max_i V_i(x_i) >= gamma_k(|u|_2)
///  - componentwise: |x_i| >= gamma_k(|u_i|) for every i
enum class GateForm { max_storage, componentwise };

struct DensityGate {
  GateForm form = GateForm::max_storage;
  ScalarFn gamma_k;
};

std::string to_string(GateForm form);

/// Grid points of `box`, optionally restricted to the shell
/// {x in outer} \ {x in inner}.
struct DensityRegion {
  std::string name;
  BoxGrid box;
  std::optional<Region> outer;
  std::optional<Region> inner;

  bool keeps(const SystemModel& model, std::span<const double> x) const;
};

struct DensityViolation {
  std::vector<double> x;
  double divergence = 0.0;
};

struct DensityCheckReport {
  DensityRegion region;
  GateForm gate_form = GateForm::max_storage;
  std::string gamma_label;
  InputBounds u;
  double q_tol = 0.0;
  double measure_zero_budget = 0.0;

  std::size_t points = 0;  // grid points kept by the region
  std::size_t gated = 0;
  std::size_t violation_count = 0;
  double violation_fraction = 0.0;  // of gated points
  double min_divergence = kInf;     // over all region points
  double q_floor = kInf;            // min divergence over gated points
  bool inconclusive = false;        // no gated points
  bool passed = false;
  std::vector<DensityViolation> violations;
};

struct DensityCheckOptions {
  double q_tol = 0.0;
  double measure_zero_budget = 0.0;
  std::size_t violation_cap = 100;
  Execution exec = Execution::parallel;
};

/// For each region point passing the gate, requires div(rho f)(x, u) > q_tol.
/// Passes when violation_fraction <= measure_zero_budget and the gated set
/// is nonempty.
DensityCheckReport check_density_propagation(const DensityFn& density, const SystemModel& model,
                                             const DensityRegion& region, const DensityGate& gate,
                                             const InputBounds& u,
                                             const DensityCheckOptions& options = {});

/// D_k built as the cap shell A_k \ B_{k-1}, with A_k dilated and B_{k-1}
/// shrunk by `margin` times the per-coordinate shell width. k runs 1..l+1;
/// A_{l+1} is the whole enclosing box and B_0 is empty.
DensityRegion make_dk_region(const SgcAnalysis& analysis, const SystemModel& model, std::size_t k,
                             const BoxGrid& enclosing, double margin = 0.05);

struct NeighborhoodCertificate {
  double epsilon = 0.0;  // largest certified half-width, 0 if none
  bool certified = false;
  std::size_t steps = 0;
  double max_divergence = -kInf;  // over the certified box
};

/// Largest epsilon on the ladder eps_max * k / rungs (ascending, stopping at
/// the first failure) such that div(rho f) <= 0 on an open steps x steps grid
/// of (-epsilon, epsilon)^n.
NeighborhoodCertificate certify_nonpositive_neighborhood(const DensityFn& density,
                                                         const SystemModel& model,
                                                         const InputBounds& u, double eps_max,
                                                         std::size_t rungs, std::size_t steps,
                                                         Execution exec = Execution::parallel);

struct GammaKOptions {
  double precision = 2.220446049250313e-16;
  double scan_hi = 0.0;     // defaults to 2a
  double grid_step = 1e-3;
};

struct GammaKConstruction {
  ScalarFn threshold;    // |u_i| -> threshold on |x_i|
  ScalarFn lower_bound;  // class-K lower bound of m on [0, scan_hi]
  double scan_hi = 0.0;
  double min_m = 0.0;    // min of m over the positive grid points
};

/// Gate for the example's positive quadrant: a class-K lower bound of
/// m(r) = (25 + eps)|g(r)| - 25 h(r) (running minimum from the right times
/// s / (1 + s)), inverted on its range, composed with
/// s -> s^2 / ((1 - delta)(a + 1)^2). Throws std::domain_error if m is not
/// positive on the grid.
GammaKConstruction construct_gamma_k_example(double delta, double epsilon, int n,
                                             const GammaKOptions& options = {});
ScalarFn derive_gamma_k_example(double delta, double epsilon, int n,
                                const GammaKOptions& options = {});

}  // namespace smallgain
