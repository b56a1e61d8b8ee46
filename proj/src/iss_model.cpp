#include "smallgain/iss_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace smallgain {

StorageFunction StorageFunction::abs_value() {
  StorageFunction v;
  v.value = [](std::span<const double> x) { return std::abs(x[0]); };
  v.directional = [](std::span<const double> x, std::span<const double> dx) {
    const double sign = static_cast<double>((x[0] > 0.0) - (x[0] < 0.0));
    return sign * dx[0];
  };
  v.label = "|x|";
  return v;
}

StorageFunction StorageFunction::half_squared_norm() {
  StorageFunction v;
  v.value = [](std::span<const double> x) {
    double sum = 0.0;
    for (double c : x) sum += c * c;
    return 0.5 * sum;
  };
  v.label = "|x|^2/2";
  return v;
}

double euclidean_norm(std::span<const double> x) {
  double sum = 0.0;
  for (double c : x) sum += c * c;
  return std::sqrt(sum);
}

void SystemModel::field(std::span<const double> x, const InputBounds& u, std::span<double> dx) const {
  const auto x1 = x.first(n1);
  const auto x2 = x.subspan(n1, n2);
  f1(x1, x2, u.u1, dx.first(n1));
  f2(x1, x2, u.u2, dx.subspan(n1, n2));
}

ModelInvariantReport validate_model(const SystemModel& model, const BoxGrid& grid, double origin_tol,
                                    double sandwich_tol) {
  grid.validate();
  if (grid.dim() != model.dim()) throw std::invalid_argument("validate_model: grid dimension mismatch");
  ModelInvariantReport report;
  std::vector<double> zero(model.dim(), 0.0), dx(model.dim());
  model.field(zero, InputBounds{}, dx);
  for (double c : dx) report.origin_residual = std::max(report.origin_residual, std::abs(c));

  std::vector<double> x(model.dim());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.point(p, x);
    for (int i = 1; i <= 2; ++i) {
      const auto xi = model.part(i, x);
      const double r = euclidean_norm(xi);
      const double v = model.storage(i, xi);
      ++report.sandwich_samples;
      if (model.alpha_lo(i)(r) > v + sandwich_tol || v > model.alpha_hi(i)(r) + sandwich_tol)
        ++report.sandwich_violations;
    }
  }
  report.ok = report.origin_residual <= origin_tol && report.sandwich_violations == 0;
  return report;
}

double storage_derivative(const SystemModel& model, int i, std::span<const double> x, double u,
                          bool* directional) {
  const std::size_t ni = model.part_dim(i);
  std::vector<double> dxi(ni);
  const auto x1 = model.part(1, x);
  const auto x2 = model.part(2, x);
  (i == 1 ? model.f1 : model.f2)(x1, x2, u, dxi);

  const auto xi = model.part(i, x);
  const auto& storage = model.storage_fn(i);
  if (storage.directional) {
    if (directional) *directional = true;
    return storage.directional(xi, dxi);
  }
  if (directional) *directional = false;
  std::vector<double> probe(xi.begin(), xi.end());
  double vdot = 0.0;
  for (std::size_t k = 0; k < ni; ++k) {
    const double h = 1e-6 * (1.0 + std::abs(xi[k]));
    probe[k] = xi[k] + h;
    const double up = storage.value(probe);
    probe[k] = xi[k] - h;
    const double down = storage.value(probe);
    probe[k] = xi[k];
    vdot += (up - down) / (2.0 * h) * dxi[k];
  }
  return vdot;
}

namespace {

struct IssSample {
  bool gated = false;
  bool directional = false;
  bool nonsmooth = false;
  double u = 0.0;
  double vdot = 0.0;
  double bound = 0.0;
};

}  // namespace

IssLyapunovReport check_iss_lyapunov(const SystemModel& model, int i, const BoxGrid& grid,
                                     const IssCheckOptions& options) {
  if (i != 1 && i != 2) throw std::invalid_argument("check_iss_lyapunov: subsystem must be 1 or 2");
  grid.validate();
  if (grid.dim() != model.dim()) throw std::invalid_argument("check_iss_lyapunov: grid dimension mismatch");
  if (options.u_steps == 0) throw std::invalid_argument("check_iss_lyapunov: u_steps must be positive");
  const int j = 3 - i;
  const std::size_t points = grid.size();
  const std::size_t total = points * options.u_steps;

  std::vector<IssSample> samples(total);
  for_each_index(total, options.exec, [&](std::size_t idx) {
    std::vector<double> x(model.dim());
    grid.point(idx / options.u_steps, x);
    const std::size_t ui = idx % options.u_steps;
    const double u = options.u_steps == 1 ? options.u_bound
                                          : options.u_bound * static_cast<double>(ui) /
                                                static_cast<double>(options.u_steps - 1);
    IssSample& s = samples[idx];
    s.u = u;
    const auto xi = model.part(i, x);
    const double vi = model.storage(i, xi);
    const double vj = model.storage(j, model.part(j, x));
    const double gate = std::max(model.interconnect_gain(i)(vj), model.external_gain(i)(u));
    if (!(vi >= gate)) return;
    s.gated = true;
    s.vdot = storage_derivative(model, i, x, u, &s.directional);
    const double r = euclidean_norm(xi);
    s.nonsmooth = s.directional && r == 0.0;
    s.bound = -model.decay(i)(r) + options.slack_tol;
  });

  IssLyapunovReport report;
  report.subsystem = i;
  report.grid = grid;
  report.u_bound = options.u_bound;
  report.u_steps = options.u_steps;
  report.slack_tol = options.slack_tol;
  report.samples = total;
  std::vector<double> x(model.dim());
  for (std::size_t idx = 0; idx < total; ++idx) {
    const IssSample& s = samples[idx];
    if (!s.gated) continue;
    ++report.gated;
    if (s.directional) ++report.directional_samples;
    if (s.nonsmooth) ++report.nonsmooth_samples;
    const double margin = s.bound - s.vdot;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < 0.0) {
      ++report.violation_count;
      if (report.violations.size() < options.violation_cap) {
        grid.point(idx / options.u_steps, x);
        report.violations.push_back(IssViolation{x, s.u, s.vdot, s.bound});
      }
    }
  }
  return report;
}

namespace {

const SgcInterval& interval_at(const SgcAnalysis& analysis, std::size_t k) {
  if (k < 1 || k > analysis.intervals.size())
    throw std::out_of_range("region index k outside 1.." + std::to_string(analysis.intervals.size()));
  return analysis.intervals[k - 1];
}

}  // namespace

Region region_a(const SgcAnalysis& analysis, const SystemModel& model, std::size_t k) {
  const double m = interval_at(analysis, k).lo;
  const double g21 = model.gamma_21(m);
  Region region;
  region.kind = RegionKind::a;
  region.k = k;
  region.v1_cap = std::max(m, model.gamma_12(m));
  region.v2_cap = std::max(g21, model.gamma_21(g21));
  return region;
}

Region region_b(const SgcAnalysis& analysis, const SystemModel& model, std::size_t k) {
  const auto& interval = interval_at(analysis, k);
  Region region;
  region.kind = RegionKind::b;
  region.k = k;
  region.v1_cap = interval.hi;
  region.v2_cap = model.gamma_21(interval.hi);
  region.unbounded = interval.right_open;
  return region;
}

bool region_contains(const Region& region, const SystemModel& model, std::span<const double> x) {
  if (region.unbounded) return true;
  return model.storage(1, model.part(1, x)) <= region.v1_cap &&
         model.storage(2, model.part(2, x)) <= region.v2_cap;
}

double region_distance(const Region& region, const SystemModel& model, std::span<const double> x) {
  if (region.unbounded) return 0.0;
  const double e1 = std::max(0.0, model.storage(1, model.part(1, x)) - region.v1_cap);
  const double e2 = std::max(0.0, model.storage(2, model.part(2, x)) - region.v2_cap);
  return std::hypot(e1, e2);
}

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::a: return "A_k";
    case RegionKind::b: return "B_k";
    case RegionKind::custom: return "custom";
  }
  return "custom";
}

}  // namespace smallgain
