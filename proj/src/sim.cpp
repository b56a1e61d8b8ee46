#include "smallgain/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace smallgain {

std::string to_string(Classification::Kind kind) {
  switch (kind) {
    case Classification::Kind::converged_to_equilibrium: return "converged_to_equilibrium";
    case Classification::Kind::entered_ball: return "entered_ball";
    case Classification::Kind::escaped: return "escaped";
    case Classification::Kind::undecided: return "undecided";
  }
  return "undecided";
}

namespace {

std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("integrate: dt and t_end must be positive");
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

std::size_t window_start(std::size_t steps, double window_fraction) {
  const auto width = static_cast<std::size_t>(std::floor(window_fraction * static_cast<double>(steps) + 1e-9));
  return steps - std::min(width, steps);
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double c) { return std::isfinite(c); });
}

// Accumulates what classification needs from the final window.
class WindowTracker {
 public:
  WindowTracker(std::span<const std::vector<double>> equilibria, const ClassifyOptions& options)
      : equilibria_(equilibria), options_(options), max_distance_(equilibria.size(), 0.0) {}

  void observe(std::span<const double> x) {
    ++count_;
    sup_norm_ = std::max(sup_norm_, euclidean_norm(x));
    for (std::size_t e = 0; e < equilibria_.size(); ++e) {
      double sum = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double diff = x[d] - equilibria_[e][d];
        sum += diff * diff;
      }
      max_distance_[e] = std::max(max_distance_[e], std::sqrt(sum));
    }
  }

  double sup_norm() const { return sup_norm_; }

  Classification result(bool truncated) const {
    Classification c;
    if (truncated) {
      c.kind = Classification::Kind::escaped;
      c.radius = options_.escape_bound;
      return c;
    }
    if (count_ == 0) return c;
    std::size_t best = equilibria_.size();
    for (std::size_t e = 0; e < equilibria_.size(); ++e)
      if (max_distance_[e] <= options_.conv_tol && (best == equilibria_.size() || max_distance_[e] < max_distance_[best]))
        best = e;
    if (best < equilibria_.size()) {
      c.kind = Classification::Kind::converged_to_equilibrium;
      c.equilibrium = best;
      return c;
    }
    if (sup_norm_ < options_.escape_bound) {
      c.kind = Classification::Kind::entered_ball;
      c.radius = sup_norm_;
      return c;
    }
    c.kind = Classification::Kind::escaped;
    c.radius = options_.escape_bound;
    return c;
  }

 private:
  std::span<const std::vector<double>> equilibria_;
  ClassifyOptions options_;
  std::vector<double> max_distance_;
  double sup_norm_ = 0.0;
  std::size_t count_ = 0;
};

// Runs the fixed-step scheme, calling visit(k, x) for k = 0..steps. Once a
// step leaves x bitwise unchanged the remaining states are that same x, so
// visit is told via `stationary_from` instead of integrating further.
template <class Visit>
bool run_rk4(const SystemModel& model, std::span<const double> x0, const InputBounds& u, double dt,
             std::size_t steps, Visit&& visit, std::size_t* stationary_from = nullptr) {
  const std::size_t n = model.dim();
  std::vector<double> x(x0.begin(), x0.end()), previous(n);
  Rk4 rk4(n);
  auto field = [&](std::span<const double> state, std::span<double> dx) { model.field(state, u, dx); };
  visit(std::size_t{0}, std::span<const double>(x));
  for (std::size_t k = 1; k <= steps; ++k) {
    std::copy(x.begin(), x.end(), previous.begin());
    rk4.step(field, x, dt);
    if (!all_finite(x)) return false;
    visit(k, std::span<const double>(x));
    if (stationary_from && x == previous) {
      *stationary_from = k;
      return true;
    }
  }
  return true;
}

}  // namespace

Trajectory integrate(const SystemModel& model, std::span<const double> x0, const InputBounds& u,
                     double t_end, double dt, const IntegrateOptions& options) {
  if (x0.size() != model.dim()) throw std::invalid_argument("integrate: x0 dimension mismatch");
  const std::size_t steps = step_count(t_end, dt);
  const std::size_t stride = std::max<std::size_t>(1, options.record_stride);

  Trajectory traj;
  traj.dim = model.dim();
  traj.u = u;
  traj.dt = dt;
  traj.t_end = t_end;
  std::vector<double> last(x0.begin(), x0.end());
  auto record = [&](std::size_t k, std::span<const double> x) {
    if (k % stride == 0 || k == steps) {
      traj.times.push_back(static_cast<double>(k) * dt);
      traj.states.insert(traj.states.end(), x.begin(), x.end());
    }
    std::copy(x.begin(), x.end(), last.begin());
  };
  std::size_t stationary = steps + 1;
  const bool finite = run_rk4(model, x0, u, dt, steps, record, &stationary);
  traj.truncated = !finite;
  if (finite && stationary <= steps) {
    for (std::size_t k = stationary + 1; k <= steps; ++k)
      if (k % stride == 0 || k == steps) {
        traj.times.push_back(static_cast<double>(k) * dt);
        traj.states.insert(traj.states.end(), last.begin(), last.end());
      }
  }

  if (finite && options.estimate_error) {
    std::vector<double> fine_end(x0.begin(), x0.end());
    std::size_t fine_stationary = 2 * steps + 1;
    const bool fine_ok = run_rk4(
        model, x0, u, 0.5 * dt, 2 * steps,
        [&](std::size_t, std::span<const double> x) { std::copy(x.begin(), x.end(), fine_end.begin()); },
        &fine_stationary);
    if (fine_ok) {
      double worst = 0.0;
      for (std::size_t d = 0; d < last.size(); ++d) worst = std::max(worst, std::abs(last[d] - fine_end[d]));
      traj.error_estimate = worst / 15.0;
    }
  }
  if (traj.truncated) {
    traj.classification.kind = Classification::Kind::escaped;
    traj.classification.radius = kInf;
  }
  return traj;
}

Classification classify(const Trajectory& trajectory, std::span<const std::vector<double>> equilibria,
                        const ClassifyOptions& options) {
  WindowTracker tracker(equilibria, options);
  if (!trajectory.truncated && trajectory.size() > 0) {
    const std::size_t steps = step_count(trajectory.t_end, trajectory.dt);
    const double start = static_cast<double>(window_start(steps, options.window_fraction)) * trajectory.dt;
    const double slack = 1e-9 * trajectory.dt;
    for (std::size_t k = 0; k < trajectory.size(); ++k)
      if (trajectory.times[k] >= start - slack) tracker.observe(trajectory.state(k));
  }
  return tracker.result(trajectory.truncated);
}

SweepCell simulate_cell(const SystemModel& model, std::span<const double> x0, const InputBounds& u,
                        const SweepOptions& options) {
  const std::size_t steps = step_count(options.t_end, options.dt);
  const std::size_t first = window_start(steps, options.classify.window_fraction);
  WindowTracker tracker(options.equilibria, options.classify);
  SweepCell cell;
  cell.x0.assign(x0.begin(), x0.end());
  cell.final_state.assign(x0.begin(), x0.end());
  std::size_t stationary = steps + 1;
  const bool finite = run_rk4(
      model, x0, u, options.dt, steps,
      [&](std::size_t k, std::span<const double> x) {
        if (k >= first) tracker.observe(x);
        std::copy(x.begin(), x.end(), cell.final_state.begin());
      },
      &stationary);
  // A stationary state before the window is the whole window.
  if (finite && stationary <= steps && stationary < first) tracker.observe(cell.final_state);
  cell.classification = tracker.result(!finite);
  cell.final_norm = finite ? euclidean_norm(cell.final_state) : kInf;
  cell.window_sup_norm = tracker.sup_norm();
  return cell;
}

SweepReport sweep(const SystemModel& model, const InputBounds& u, const BoxGrid& box,
                  const SweepOptions& options) {
  box.validate();
  if (box.dim() != model.dim()) throw std::invalid_argument("sweep: grid dimension mismatch");
  SweepReport report;
  report.grid = box;
  report.u = u;
  report.t_end = options.t_end;
  report.dt = options.dt;
  report.classify = options.classify;
  report.cells.resize(box.size());
  for_each_index(box.size(), options.exec, [&](std::size_t idx) {
    std::vector<double> x0(model.dim());
    box.point(idx, x0);
    report.cells[idx] = simulate_cell(model, x0, u, options);
  });

  for (const auto& cell : report.cells) {
    switch (cell.classification.kind) {
      case Classification::Kind::converged_to_equilibrium: ++report.converged; break;
      case Classification::Kind::entered_ball: ++report.entered_ball; break;
      case Classification::Kind::escaped: ++report.escaped; break;
      case Classification::Kind::undecided: ++report.undecided; break;
    }
    if (cell.classification.bounded())
      report.estimated_radius = std::max(report.estimated_radius, cell.window_sup_norm);
  }
  report.nonconverging_fraction =
      static_cast<double>(report.escaped + report.undecided) / static_cast<double>(report.cells.size());
  return report;
}

Theorem1Report verify_theorem1_claim(const SystemModel& model, const SgcAnalysis& analysis,
                                     std::size_t k, const InputBounds& u,
                                     const Theorem1Options& options) {
  Theorem1Report report;
  report.k = k;
  report.u = u;
  report.a = region_a(analysis, model, k);
  report.b = region_b(analysis, model, k);
  report.neighborhood_radius = options.neighborhood_radius;
  if (report.b.unbounded)
    throw std::invalid_argument("verify_theorem1_claim: B_k is unbounded (right-open interval); "
                                "no uniform sample exists");

  // {V_i <= c} lies inside {|x_i| <= alpha_lo_i^-1(c)}.
  const std::size_t n = model.dim();
  std::vector<double> half_width(n);
  for (int i = 1; i <= 2; ++i) {
    const ScalarFn& lo = model.alpha_lo(i);
    const double reach = generalized_inverse([&lo](double s) { return lo(s); }, Interval{}, report.b.cap(i), 1e-12);
    const std::size_t offset = i == 1 ? 0 : model.n1;
    for (std::size_t d = 0; d < model.part_dim(i); ++d) half_width[offset + d] = reach;
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<double>> starts;
  std::vector<double> x(n);
  const std::size_t max_attempts = 1000 * std::max<std::size_t>(1, options.sample_count);
  for (std::size_t attempt = 0; attempt < max_attempts && starts.size() < options.sample_count; ++attempt) {
    for (std::size_t d = 0; d < n; ++d)
      x[d] = std::uniform_real_distribution<double>(-half_width[d], half_width[d])(rng);
    if (region_contains(report.b, model, x) && !region_contains(report.a, model, x)) starts.push_back(x);
  }
  report.samples = starts.size();
  if (starts.empty()) return report;

  SweepOptions run;
  run.t_end = options.t_end;
  run.dt = options.dt;
  std::vector<SweepCell> cells(starts.size());
  for_each_index(starts.size(), options.exec,
                 [&](std::size_t s) { cells[s] = simulate_cell(model, starts[s], u, run); });

  for (const auto& cell : cells) {
    const double distance = cell.classification.kind == Classification::Kind::escaped
                                ? kInf
                                : region_distance(report.a, model, cell.final_state);
    if (distance <= options.neighborhood_radius) ++report.converged;
    if (report.worst_x0.empty() || distance > report.worst_distance) {
      report.worst_distance = distance;
      report.worst_x0 = cell.x0;
      report.worst_end = cell.final_state;
    }
  }
  report.fraction = static_cast<double>(report.converged) / static_cast<double>(report.samples);
  return report;
}

std::size_t count_storage_increases(const Trajectory& trajectory, const SystemModel& model,
                                    const Region& region, double tol) {
  std::size_t increases = 0;
  bool inside = false;
  double previous = 0.0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto x = trajectory.state(k);
    const double v = std::max(model.storage(1, model.part(1, x)), model.storage(2, model.part(2, x)));
    if (!inside) {
      inside = region_contains(region, model, x);
      previous = v;
      continue;
    }
    if (v > previous + tol) ++increases;
    previous = v;
  }
  return increases;
}

}  // namespace smallgain
