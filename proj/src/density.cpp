#include "smallgain/density.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <memory>

#include "smallgain/example_system.hpp"

namespace smallgain {

double divergence(const DensityFn& density, const SystemModel& model, std::span<const double> x,
                  const InputBounds& u) {
  const std::size_t n = model.dim();
  const double rho = density.rho(x);
  if (!(rho > 0.0))
    throw PositivityError(fmt::format("density {} not positive ({})", density.label, rho),
                          std::vector<double>(x.begin(), x.end()));

  std::vector<double> grad(n), f(n);
  model.field(x, u, f);

  std::vector<double> probe(x.begin(), x.end());
  if (density.grad_rho) {
    density.grad_rho(x, grad);
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      probe[j] = x[j] + h;
      const double up = density.rho(probe);
      probe[j] = x[j] - h;
      const double down = density.rho(probe);
      probe[j] = x[j];
      grad[j] = (up - down) / (2.0 * h);
    }
  }

  double div_f = 0.0;
  if (model.divergence_f) {
    div_f = model.divergence_f(x, u);
  } else {
    std::vector<double> f_up(n), f_down(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      probe[j] = x[j] + h;
      model.field(probe, u, f_up);
      probe[j] = x[j] - h;
      model.field(probe, u, f_down);
      probe[j] = x[j];
      div_f += (f_up[j] - f_down[j]) / (2.0 * h);
    }
  }

  double transport = 0.0;
  for (std::size_t j = 0; j < n; ++j) transport += grad[j] * f[j];
  return transport + rho * div_f;
}

std::string to_string(GateForm form) {
  return form == GateForm::max_storage ? "max_storage" : "componentwise";
}

bool DensityRegion::keeps(const SystemModel& model, std::span<const double> x) const {
  if (outer && !region_contains(*outer, model, x)) return false;
  if (inner && region_contains(*inner, model, x)) return false;
  return true;
}

namespace {

bool gate_passes(const DensityGate& gate, const SystemModel& model, std::span<const double> x,
                 const InputBounds& u) {
  if (gate.form == GateForm::max_storage) {
    const double v = std::max(model.storage(1, model.part(1, x)), model.storage(2, model.part(2, x)));
    return v >= gate.gamma_k(u.norm());
  }
  for (int i = 1; i <= 2; ++i)
    if (!(euclidean_norm(model.part(i, x)) >= gate.gamma_k(u.of(i)))) return false;
  return true;
}

struct DensitySample {
  bool kept = false;
  bool gated = false;
  double divergence = 0.0;
};

}  // namespace

DensityCheckReport check_density_propagation(const DensityFn& density, const SystemModel& model,
                                             const DensityRegion& region, const DensityGate& gate,
                                             const InputBounds& u,
                                             const DensityCheckOptions& options) {
  region.box.validate();
  if (region.box.dim() != model.dim())
    throw std::invalid_argument("check_density_propagation: grid dimension mismatch");

  const std::size_t total = region.box.size();
  std::vector<DensitySample> samples(total);
  for_each_index(total, options.exec, [&](std::size_t idx) {
    std::vector<double> x(model.dim());
    region.box.point(idx, x);
    DensitySample& s = samples[idx];
    if (!region.keeps(model, x)) return;
    s.kept = true;
    s.divergence = divergence(density, model, x, u);
    s.gated = gate_passes(gate, model, x, u);
  });

  DensityCheckReport report;
  report.region = region;
  report.gate_form = gate.form;
  report.gamma_label = gate.gamma_k.label();
  report.u = u;
  report.q_tol = options.q_tol;
  report.measure_zero_budget = options.measure_zero_budget;

  std::vector<double> x(model.dim());
  for (std::size_t idx = 0; idx < total; ++idx) {
    const DensitySample& s = samples[idx];
    if (!s.kept) continue;
    ++report.points;
    report.min_divergence = std::min(report.min_divergence, s.divergence);
    if (!s.gated) continue;
    ++report.gated;
    report.q_floor = std::min(report.q_floor, s.divergence);
    if (!(s.divergence > options.q_tol)) {
      ++report.violation_count;
      if (report.violations.size() < options.violation_cap) {
        region.box.point(idx, x);
        report.violations.push_back({x, s.divergence});
      }
    }
  }
  report.inconclusive = report.gated == 0;
  report.violation_fraction =
      report.gated == 0 ? 0.0 : static_cast<double>(report.violation_count) / static_cast<double>(report.gated);
  report.passed = !report.inconclusive && report.violation_fraction <= options.measure_zero_budget;
  return report;
}

DensityRegion make_dk_region(const SgcAnalysis& analysis, const SystemModel& model, std::size_t k,
                             const BoxGrid& enclosing, double margin) {
  const std::size_t l = analysis.count();
  if (k < 1 || k > l + 1)
    throw std::out_of_range(fmt::format("D_k index {} outside 1..{}", k, l + 1));
  DensityRegion region;
  region.name = fmt::format("D_{}", k);
  region.box = enclosing;
  if (k <= l) region.outer = region_a(analysis, model, k);
  if (k >= 2) region.inner = region_b(analysis, model, k - 1);

  if (region.inner && region.inner->unbounded) return region;  // empty shell
  for (int i = 1; i <= 2; ++i) {
    const double outer_cap = region.outer ? region.outer->cap(i) : kInf;
    const double inner_cap = region.inner ? region.inner->cap(i) : 0.0;
    const double width = std::isfinite(outer_cap) ? std::abs(outer_cap - inner_cap) : inner_cap;
    if (region.outer) (i == 1 ? region.outer->v1_cap : region.outer->v2_cap) += margin * width;
    if (region.inner) (i == 1 ? region.inner->v1_cap : region.inner->v2_cap) -= margin * width;
  }
  return region;
}

NeighborhoodCertificate certify_nonpositive_neighborhood(const DensityFn& density,
                                                         const SystemModel& model,
                                                         const InputBounds& u, double eps_max,
                                                         std::size_t rungs, std::size_t steps,
                                                         Execution exec) {
  if (!(eps_max > 0.0) || rungs == 0 || steps == 0)
    throw std::invalid_argument("certify_nonpositive_neighborhood: bad ladder");
  NeighborhoodCertificate cert;
  cert.steps = steps;
  const std::size_t n = model.dim();
  for (std::size_t rung = 1; rung <= rungs; ++rung) {
    const double eps = eps_max * static_cast<double>(rung) / static_cast<double>(rungs);
    BoxGrid box{std::vector<double>(n, -eps), std::vector<double>(n, eps), std::vector<std::size_t>(n, steps), true};
    std::vector<double> values(box.size());
    for_each_index(box.size(), exec, [&](std::size_t idx) {
      std::vector<double> x(n);
      box.point(idx, x);
      values[idx] = divergence(density, model, x, u);
    });
    const double worst = *std::max_element(values.begin(), values.end());
    if (worst > 0.0) break;
    cert.epsilon = eps;
    cert.certified = true;
    cert.max_divergence = worst;
  }
  return cert;
}

GammaKConstruction construct_gamma_k_example(double delta, double epsilon, int n,
                                             const GammaKOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  example::ExampleParams params;
  params.n = n;
  params.precision = options.precision;
  params.validate();
  const double a = params.a();
  const double scan_hi = options.scan_hi > 0.0 ? options.scan_hi : 2.0 * a;
  if (!std::isfinite(scan_hi)) throw std::invalid_argument("construct_gamma_k_example: scan_hi required for n = inf");
  if (!(options.grid_step > 0.0)) throw std::invalid_argument("construct_gamma_k_example: grid_step must be positive");

  const auto cells = static_cast<std::size_t>(std::ceil(scan_hi / options.grid_step - 1e-9));
  std::vector<double> xs(cells + 1), lower(cells + 1);
  double min_m = kInf;
  for (std::size_t j = 0; j <= cells; ++j) {
    const double r = std::min(static_cast<double>(j) * options.grid_step, scan_hi);
    xs[j] = r;
    const double m = std::min(example::m_function(r, params, epsilon), example::m_function(-r, params, epsilon));
    if (j > 0) {
      if (!(m > 0.0))
        throw std::domain_error(fmt::format("m not positive definite: m({}) = {} for epsilon = {}", r, m, epsilon));
      min_m = std::min(min_m, m);
    }
    lower[j] = j == 0 ? 0.0 : m;
  }
  for (std::size_t j = cells; j-- > 0;) lower[j] = std::min(lower[j], lower[j + 1]);

  const ScalarFn running_min = ScalarFn::from_samples(xs, lower, "runmin(m)");
  ScalarFn bound([running_min](double s) { return running_min(s) * s / (1.0 + s); }, Interval{0.0, scan_hi},
                 fmt::format("K(m, eps={})", epsilon));

  const double top = bound(scan_hi);
  const double u_max = (a + 1.0) * std::sqrt((1.0 - delta) * top);
  ScalarFn threshold(
      [bound, a, delta, scan_hi](double u) {
        const double c = u / (a + 1.0);
        const double y = c * c / (1.0 - delta);
        return invert_on_interval(bound, Interval{0.0, scan_hi}, y, 1e-12 * y);
      },
      Interval{0.0, u_max}, fmt::format("gamma_k(delta={}, eps={})", delta, epsilon));

  GammaKConstruction construction{threshold, bound, scan_hi, min_m};
  return construction;
}

ScalarFn derive_gamma_k_example(double delta, double epsilon, int n, const GammaKOptions& options) {
  return construct_gamma_k_example(delta, epsilon, n, options).threshold;
}

}  // namespace smallgain
