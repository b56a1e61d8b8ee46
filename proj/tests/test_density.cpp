#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smallgain/density.hpp"
#include "smallgain/example_system.hpp"
#include "toy_models.hpp"

using namespace smallgain;
using example::ExampleParams;

namespace {

// Fourth-order central difference of (rho f_j) along x_j, summed over j.
double product_divergence_oracle(double x1, double x2, const InputBounds& u, const ExampleParams& p) {
  auto rho_f = [&](int j, double a, double b) {
    const double r = std::exp(-(a + b));
    return j == 1 ? r * example::f_i(1, a, b, u.u1, p) : r * example::f_i(2, b, a, u.u2, p);
  };
  const double s1 = 3e-5 * (1 + std::abs(x1)), s2 = 3e-5 * (1 + std::abs(x2));
  auto d1 = [&](double d) { return rho_f(1, x1 + d, x2); };
  auto d2 = [&](double d) { return rho_f(2, x1, x2 + d); };
  return (-d1(2 * s1) + 8 * d1(s1) - 8 * d1(-s1) + d1(-2 * s1)) / (12 * s1) +
         (-d2(2 * s2) + 8 * d2(s2) - 8 * d2(-s2) + d2(-2 * s2)) / (12 * s2);
}

double closed_form(double x1, double x2, const ExampleParams& p) {
  const double r = std::exp(-(x1 + x2));
  const double f1 = example::f_i(1, x1, x2, 0.0, p), f2 = example::f_i(2, x2, x1, 0.0, p);
  return -r * (f1 + f2) - 25 * r * (example::g_prime(x1, p) + example::g_prime(x2, p));
}

DensityFn unit_density() {
  return DensityFn{[](std::span<const double>) { return 1.0; }, nullptr, "1"};
}

}  // namespace

TEST(Divergence, ConstantDensityLinearField) {
  auto model = toy::decoupled_decay();
  model.divergence_f = nullptr;
  const std::vector<double> x{1.0, 1.0};
  EXPECT_NEAR(divergence(unit_density(), model, x, {}), -2.0, 1e-8);
}

TEST(Divergence, ExampleAtOrigin) {
  const auto model = example::make_model({}, 0.5);
  const std::vector<double> x{0.0, 0.0};
  const double value = divergence(example::density(), model, x, {});
  // Both subsystems contribute -25 g'(0) = -50.
  EXPECT_NEAR(value, -100.0, 1e-9);
  EXPECT_NEAR(value, product_divergence_oracle(0.0, 0.0, {}, {}), 1e-5);
}

TEST(Divergence, ExampleAtMinusFive) {
  const ExampleParams p;
  const auto model = example::make_model(p, 0.5);
  const std::vector<double> x{-5.0, -5.0};
  const double value = divergence(example::density(), model, x, {});
  EXPECT_NEAR(value, closed_form(-5.0, -5.0, p), 1e-9 * std::abs(value));
  EXPECT_LT(value, 0.0);
}

TEST(Divergence, MatchesProductOracleOnRandomPoints) {
  for (const InputBounds u : {InputBounds{0.0, 0.0}, InputBounds{3.0, 4.0}}) {
    ExampleParams p;
    p.u1_bound = u.u1;
    p.u2_bound = u.u2;
    const auto model = example::make_model(p, 0.5);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int k = 0; k < 500; ++k) {
      const std::vector<double> x{dist(rng), dist(rng)};
      const double analytic = divergence(example::density(), model, x, u);
      const double oracle = product_divergence_oracle(x[0], x[1], u, p);
      EXPECT_NEAR(analytic, oracle, 1e-6 * std::abs(oracle) + 1e-300) << x[0] << "," << x[1];
    }
  }
}

TEST(Divergence, FiniteDifferenceFallbackAgrees) {
  auto model = example::make_model({}, 0.5);
  const auto analytic = divergence(example::density(), model, std::vector<double>{2.3, -1.7}, {});
  model.divergence_f = nullptr;
  auto rho = example::density();
  rho.grad_rho = nullptr;
  const auto numeric = divergence(rho, model, std::vector<double>{2.3, -1.7}, {});
  EXPECT_NEAR(numeric, analytic, 1e-6 * std::abs(analytic));
}

TEST(Divergence, NonPositiveDensityRejected) {
  const DensityFn bad{[](std::span<const double>) { return 0.0; }, nullptr, "0"};
  try {
    divergence(bad, toy::decoupled_decay(), std::vector<double>{1.0, 2.0}, {});
    FAIL();
  } catch (const PositivityError& e) {
    EXPECT_EQ(e.point(), (std::vector<double>{1.0, 2.0}));
  }
}

TEST(DensityCheck, OriginBoxReportsViolations) {
  const auto model = example::make_model({}, 0.5);
  DensityRegion region{"origin", BoxGrid::square(-0.1, 0.1, 20, true), std::nullopt, std::nullopt};
  const auto report = check_density_propagation(example::density(), model, region, DensityGate{}, {});
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.violation_fraction, 1.0);
  EXPECT_LT(report.min_divergence, -50.0);
  EXPECT_LE(report.q_floor, report.min_divergence + 1e-300);
  EXPECT_EQ(report.violations.size(), 100u);
}

TEST(DensityCheck, NegativeQuadrantDivergenceIsNegative) {
  const ExampleParams p;
  const auto model = example::make_model(p, 0.5);
  DensityRegion region{"q3", BoxGrid::square(-60, -0.1, 40), std::nullopt, std::nullopt};
  const auto report = check_density_propagation(example::density(), model, region, DensityGate{}, {});
  EXPECT_EQ(report.points, 1600u);
  double oracle_max = -kInf;
  for (std::size_t idx = 0; idx < region.box.size(); ++idx) {
    std::vector<double> x(2);
    region.box.point(idx, x);
    oracle_max = std::max(oracle_max, closed_form(x[0], x[1], p));
  }
  EXPECT_LT(oracle_max, 0.0);
  EXPECT_EQ(report.violation_fraction, 1.0);
}

TEST(DensityCheck, BandAroundFirstMaximumPasses) {
  ExampleParams p;
  p.u1_bound = 3.0;
  p.u2_bound = 4.0;
  const auto model = example::make_model(p, 0.5);
  const double r1 = example::equilibria(p)[1];
  Interval band;
  for (const auto& iv : example::numerically_constant_regions(p, {1.1 * p.a()}))
    if (iv.contains(r1)) band = iv;
  ASSERT_TRUE(std::isfinite(band.hi));
  const double shrink = 0.01 * band.width();
  DensityRegion region{"band", BoxGrid::square(band.lo + shrink, band.hi - shrink, 41), std::nullopt, std::nullopt};
  DensityGate gate{GateForm::componentwise, derive_gamma_k_example(0.5, 1.0, 2)};
  const auto report = check_density_propagation(example::density(), model, region, gate, {3.0, 4.0});
  EXPECT_TRUE(report.passed);
  EXPECT_GT(report.gated, 0u);
  EXPECT_GT(report.q_floor, 0.0);
}

TEST(DensityCheck, EmptyGateIsInconclusive) {
  const auto model = toy::decoupled_decay();
  DensityRegion region{"small", BoxGrid::square(-1, 1, 5), std::nullopt, std::nullopt};
  DensityGate gate{GateForm::max_storage, ScalarFn([](double) { return 100.0; }, Interval{}, "big")};
  const auto report = check_density_propagation(unit_density(), model, region, gate, {});
  EXPECT_TRUE(report.inconclusive);
  EXPECT_FALSE(report.passed);
}

TEST(DensityCheck, BudgetAdmitsIsolatedViolations) {
  auto model = toy::decoupled_decay();
  model.divergence_f = [](std::span<const double> x, const InputBounds&) {
    return x[0] == 0.0 && x[1] == 0.0 ? -1.0 : 1.0;
  };
  DensityRegion region{"box", BoxGrid::square(-1, 1, 11), std::nullopt, std::nullopt};
  DensityCheckOptions options;
  auto report = check_density_propagation(unit_density(), model, region, DensityGate{}, {}, options);
  EXPECT_EQ(report.violation_count, 1u);
  EXPECT_FALSE(report.passed);
  options.measure_zero_budget = 0.01;
  report = check_density_propagation(unit_density(), model, region, DensityGate{}, {}, options);
  EXPECT_TRUE(report.passed);
}

TEST(DensityCheck, ComponentwiseGate) {
  const auto model = toy::decoupled_decay();
  DensityRegion region{"box", BoxGrid::square(-2, 2, 5), std::nullopt, std::nullopt};
  DensityGate gate{GateForm::componentwise, ScalarFn::identity()};
  const auto report = check_density_propagation(unit_density(), model, region, gate, {1.0, 1.0});
  // |x_i| >= 1 for both i: x_i in {-2, -1, 1, 2}.
  EXPECT_EQ(report.gated, 16u);
  EXPECT_EQ(to_string(report.gate_form), "componentwise");
}

TEST(Neighborhood, OriginCertified) {
  const auto model = example::make_model({}, 0.5);
  const auto cert = certify_nonpositive_neighborhood(example::density(), model, {}, 0.5, 50, 41);
  EXPECT_TRUE(cert.certified);
  EXPECT_GE(cert.epsilon, 0.01);
  EXPECT_LE(cert.max_divergence, 0.0);
}

TEST(GammaK, ZeroInputGivesZeroThreshold) {
  const auto gamma = derive_gamma_k_example(0.5, 1.0, 2);
  EXPECT_EQ(gamma(0.0), 0.0);
}

TEST(GammaK, IncreasingAndForwardChecked) {
  const auto c = construct_gamma_k_example(0.5, 1.0, 2);
  const double a = ExampleParams{}.a();
  double previous = 0.0;
  for (double u = 0.5; u <= 6.0; u += 0.5) {
    const double t = c.threshold(u);
    EXPECT_TRUE(std::isfinite(t));
    EXPECT_GT(t, previous);
    previous = t;
    const double y = (u / (a + 1)) * (u / (a + 1)) / 0.5;
    EXPECT_GE(c.lower_bound(t), y * (1 - 1e-9));
    const ExampleParams p;
    EXPECT_GE(std::min(example::m_function(t, p, 1.0), example::m_function(-t, p, 1.0)), c.lower_bound(t) * (1 - 1e-12));
  }
  EXPECT_GT(c.min_m, 0.0);
}

TEST(GammaK, RejectsBadParameters) {
  EXPECT_THROW(derive_gamma_k_example(0.0, 1.0, 2), std::invalid_argument);
  EXPECT_THROW(derive_gamma_k_example(0.5, -1.0, 2), std::invalid_argument);
}

TEST(Dk, IndicesAndShell) {
  const auto model = toy::coupled_linear(0.25);
  SgcAnalysis analysis;
  analysis.intervals = {SgcInterval{0.0, 3.0, false}, SgcInterval{5.0, 9.0, false}};
  const auto box = BoxGrid::square(0, 20, 5);
  EXPECT_THROW(make_dk_region(analysis, model, 0, box), std::out_of_range);
  EXPECT_THROW(make_dk_region(analysis, model, 4, box), std::out_of_range);
  const auto d2 = make_dk_region(analysis, model, 2, box, 0.0);
  ASSERT_TRUE(d2.outer && d2.inner);
  EXPECT_EQ(d2.outer->v1_cap, 5.0);
  EXPECT_EQ(d2.inner->v1_cap, 3.0);
  EXPECT_TRUE(d2.keeps(model, std::vector<double>{4.0, 0.5}));
  EXPECT_FALSE(d2.keeps(model, std::vector<double>{2.0, 0.5}));
  const auto last = make_dk_region(analysis, model, 3, box);
  EXPECT_FALSE(last.outer.has_value());
  EXPECT_TRUE(last.inner.has_value());
  const auto wide = make_dk_region(analysis, model, 2, box, 0.05);
  EXPECT_GT(wide.outer->v1_cap, 5.0);
  EXPECT_LT(wide.inner->v1_cap, 3.0);
}
