#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smallgain/exec.hpp"
#include "smallgain/grid.hpp"
#include "smallgain/iss_model.hpp"
#include "smallgain/scalar_fn.hpp"

namespace smallgain {

/// Classical fixed-step fourth-order Runge-Kutta with reusable buffers.
class Rk4 {
 public:
  explicit Rk4(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  /// field(x, dx) writes dx = f(x).
  template <class Field>
  void step(const Field& field, std::span<double> x, double dt) {
    const std::size_t n = x.size();
    const double half = 0.5 * dt;
    field(std::span<const double>(x), std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
    field(std::span<const double>(tmp_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
    field(std::span<const double>(tmp_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
    field(std::span<const double>(tmp_), std::span<double>(k4_));
    for (std::size_t i = 0; i < n; ++i)
      x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

struct Classification {
  enum class Kind { converged_to_equilibrium, entered_ball, escaped, undecided };
  Kind kind = Kind::undecided;
  std::size_t equilibrium = 0;  // index into the equilibria list
  double radius = 0.0;          // entered_ball: max norm over the window; escaped: the bound

  bool bounded() const { return kind == Kind::converged_to_equilibrium || kind == Kind::entered_ball; }
};

std::string to_string(Classification::Kind kind);

struct Trajectory {
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<double> states;  // times.size() rows of dim values
  InputBounds u;
  double dt = 0.0;
  double t_end = 0.0;
  bool truncated = false;  // stopped at a non-finite state
  double error_estimate = std::numeric_limits<double>::quiet_NaN();
  Classification classification;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
};

struct IntegrateOptions {
  std::size_t record_stride = 1;
  /// Reruns at dt/2 and records |x_end(dt) - x_end(dt/2)|_inf / 15.
  bool estimate_error = true;
};

/// Fixed-step RK4 on x' = f(x, u). Deterministic. A non-finite state ends
/// the run with `truncated` set and classification escaped.
Trajectory integrate(const SystemModel& model, std::span<const double> x0, const InputBounds& u,
                     double t_end, double dt, const IntegrateOptions& options = {});

struct ClassifyOptions {
  double conv_tol = 1e-3;
  double window_fraction = 0.1;  // final share of t_end inspected
  double escape_bound = 1e6;
};

/// converged_to_equilibrium(j) if every window state is within conv_tol of
/// equilibria[j]; else entered_ball(max window norm) below escape_bound;
/// else escaped. Empty window gives undecided.
Classification classify(const Trajectory& trajectory, std::span<const std::vector<double>> equilibria,
                        const ClassifyOptions& options = {});

struct SweepOptions {
  double t_end = 50.0;
  double dt = 1e-3;
  ClassifyOptions classify;
  std::vector<std::vector<double>> equilibria;
  Execution exec = Execution::parallel;
};

struct SweepCell {
  std::vector<double> x0;
  std::vector<double> final_state;
  Classification classification;
  double final_norm = 0.0;
  double window_sup_norm = 0.0;
};

struct SweepReport {
  BoxGrid grid;
  InputBounds u;
  double t_end = 0.0;
  double dt = 0.0;
  ClassifyOptions classify;
  std::vector<SweepCell> cells;  // grid order
  std::size_t converged = 0;
  std::size_t entered_ball = 0;
  std::size_t escaped = 0;
  std::size_t undecided = 0;
  double nonconverging_fraction = 0.0;
  double estimated_radius = 0.0;  // max window sup-norm over bounded cells
};

/// Integrates from every grid point and aggregates the classifications.
/// A grid fraction estimates, but cannot certify, "almost every" initial
/// condition.
SweepReport sweep(const SystemModel& model, const InputBounds& u, const BoxGrid& box,
                  const SweepOptions& options);

/// One streamed run (no stored trajectory), as used by sweep.
SweepCell simulate_cell(const SystemModel& model, std::span<const double> x0, const InputBounds& u,
                        const SweepOptions& options);

struct Theorem1Options {
  std::size_t sample_count = 200;
  double t_end = 50.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  /// Allowed distance from A_k at the end of the run.
  double neighborhood_radius = 1e-3;
  Execution exec = Execution::parallel;
};

struct Theorem1Report {
  std::size_t k = 0;
  InputBounds u;
  Region a;
  Region b;
  std::size_t samples = 0;
  std::size_t converged = 0;
  double fraction = 0.0;
  double neighborhood_radius = 0.0;
  std::vector<double> worst_x0;
  std::vector<double> worst_end;
  double worst_distance = 0.0;
};

/// Samples initial conditions uniformly in B_k \ A_k and reports the share
/// ending within neighborhood_radius of A_k. Refuses a right-open B_k.
Theorem1Report verify_theorem1_claim(const SystemModel& model, const SgcAnalysis& analysis,
                                     std::size_t k, const InputBounds& u,
                                     const Theorem1Options& options = {});

/// Recorded steps, after the first entry into `region`, where max_i V_i grows
/// by more than tol.
std::size_t count_storage_increases(const Trajectory& trajectory, const SystemModel& model,
                                    const Region& region, double tol = 1e-12);

}  // namespace smallgain
