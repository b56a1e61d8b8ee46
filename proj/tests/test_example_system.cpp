#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "smallgain/example_system.hpp"

using namespace smallgain;
using namespace smallgain::example;

namespace {

constexpr double pi = std::numbers::pi;

ExampleParams with_n(int n) {
  ExampleParams p;
  p.n = n;
  return p;
}

// Direct transcription of g without the saturation shortcut.
double g_reference(double r, int n) {
  const double a = (4 * pi * pi * n + 3 * pi * pi) / 2;
  const double s = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
  if (std::abs(r) > a) return s * ((2 * n + 1) + (r - s * a) * (r - s * a));
  double v = std::tanh(2 * r);
  for (int i = 1; i <= n; ++i) v += s * (1 + s * std::tanh(2 * (r - s * 2 * pi * pi * i)));
  return v;
}

}  // namespace

TEST(ExampleParams, ValueOfA) {
  EXPECT_NEAR(with_n(2).a(), 11 * pi * pi / 2, 1e-12);
  EXPECT_NEAR(with_n(0).a(), 3 * pi * pi / 2, 1e-12);
  EXPECT_TRUE(std::isinf(with_n(ExampleParams::kInfinite).a()));
}

TEST(ExampleParams, Validation) {
  EXPECT_THROW(with_n(-3).validate(), std::invalid_argument);
  ExampleParams p;
  p.precision = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ExampleParams{};
  p.u1_bound = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(G, ZeroAtZero) { EXPECT_EQ(g(0.0, with_n(2)), 0.0); }

TEST(G, MatchesReference) {
  for (int n : {0, 1, 2, 5})
    for (double r = -80.0; r <= 80.0; r += 0.37) EXPECT_NEAR(g(r, with_n(n)), g_reference(r, n), 1e-12) << n << " " << r;
}

TEST(G, OddOnRandomPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  const auto p = with_n(2);
  for (int i = 0; i < 1000; ++i) {
    const double r = dist(rng);
    EXPECT_NEAR(g(-r, p), -g(r, p), 1e-12);
  }
}

TEST(G, NearContinuousAtA) {
  for (int n : {0, 1, 2, 5}) {
    const auto p = with_n(n);
    const double a = p.a();
    EXPECT_LE(std::abs(g(a - 1e-6, p) - g(a + 1e-6, p)), 1e-5) << n;
    EXPECT_LE(std::abs(g(-a + 1e-6, p) - g(-a - 1e-6, p)), 1e-5) << n;
    EXPECT_NEAR(g(a + 1e-9, p), 2 * n + 1, 1e-6);
  }
}

TEST(G, DerivativeMatchesDifference) {
  const auto p = with_n(2);
  for (double r = -70.0; r <= 70.0; r += 0.731) {
    const double step = 1e-6;
    const double fd = (g(r + step, p) - g(r - step, p)) / (2 * step);
    EXPECT_NEAR(g_prime(r, p), fd, 1e-5 * (1 + std::abs(fd))) << r;
  }
}

TEST(G, PlateauAtFirstMaximumIsExact) {
  const auto p = with_n(2);
  EXPECT_EQ(g(3 * pi * pi, p), 3.0);
}

TEST(H, Zeros) {
  const auto p = with_n(2);
  EXPECT_EQ(h(0.0, p), 0.0);
  EXPECT_NEAR(h(2 * pi * pi, p), 0.0, 1e-28);
  EXPECT_NEAR(h(4 * pi * pi, p), 0.0, 1e-28);
}

TEST(H, ValueAtPiSquared) {
  const auto p = with_n(2);
  double expected = 1.0;
  for (int i = 1; i <= 2; ++i) expected += std::tanh(pi * pi * (1 - 2 * i)) + 1;
  EXPECT_NEAR(h(pi * pi, p), expected, 1e-15);
  EXPECT_NEAR(h(pi * pi, p) - 1, 2 * std::exp(-2 * pi * pi), 1e-15);
}

TEST(H, NonNegativeOnGrid) {
  const auto p = with_n(2);
  for (int j = 0; j < 100000; ++j) {
    const double r = -150.0 + 300.0 * j / 99999.0;
    ASSERT_GE(h(r, p), 0.0) << r;
  }
}

TEST(Dynamics, OriginIsEquilibrium) {
  for (int n : {0, 1, 2, 5}) {
    EXPECT_LE(std::abs(f_i(1, 0.0, 0.0, 0.0, with_n(n))), 1e-12);
    EXPECT_LE(std::abs(f_i(2, 0.0, 0.0, 0.0, with_n(n))), 1e-12);
  }
}

TEST(Dynamics, ReducesWithoutInput) {
  const auto p = with_n(2);
  for (double x = -30; x <= 30; x += 3.1)
    for (double y = -30; y <= 30; y += 4.3) EXPECT_NEAR(f_i(1, x, y, 0.0, p), -25 * g(x, p) + 25 * h(y, p), 1e-9);
}

TEST(Dynamics, InputEntersThroughScale) {
  auto p = with_n(2);
  const double c = 3.0 / (p.a() + 1);
  EXPECT_NEAR(f_i(1, 1.0, 2.0, 3.0, p), -(25 + c) * g(1.0, p) + 25 * h(2.0, p) + c * c, 1e-12);
  p.u2_bound = 4.0;
  EXPECT_EQ(f_i(2, 1.0, 2.0, p), f_i(2, 1.0, 2.0, 4.0, p));
}

TEST(Dynamics, EquilibriaHaveSmallResidual) {
  const auto p = with_n(2);
  const auto r = equilibria(p);
  ASSERT_EQ(r.size(), 3u);
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_NEAR(r[k], 2 * pi * pi * k + pi * pi, 1e-12);
    EXPECT_LE(std::abs(f_i(1, r[k], r[k], 0.0, p)), 1e-6) << k;
  }
  const auto states = equilibrium_states(p);
  ASSERT_EQ(states.size(), 4u);
  EXPECT_EQ(states[0], (std::vector<double>{0.0, 0.0}));
}

TEST(Rounding, ThresholdValue) {
  EXPECT_NEAR(rounding_threshold(kDoubleEpsilon), std::atanh(1 - kDoubleEpsilon), 0.0);
  EXPECT_NEAR(rounding_threshold(kDoubleEpsilon) / 2, 9.18, 0.01);
  EXPECT_THROW(rounding_threshold(0.0), std::invalid_argument);
}

TEST(Rounding, SaturationPredicate) {
  const double rstar = rounding_threshold(kDoubleEpsilon);
  EXPECT_FALSE(tanh_saturated(rstar - 0.01, kDoubleEpsilon));
  EXPECT_TRUE(tanh_saturated(rstar + 0.01, kDoubleEpsilon));
  EXPECT_TRUE(tanh_saturated(-(rstar + 0.01), kDoubleEpsilon));
}

TEST(Rounding, IncreasingIntervalCountIsNPlusTwo) {
  for (int n : {0, 1, 2, 3}) {
    const auto p = with_n(n);
    const auto iv = increasing_intervals(p, RegionScan{1.1 * p.a()});
    EXPECT_EQ(iv.size(), static_cast<std::size_t>(n + 2)) << n;
  }
}

TEST(Rounding, BoundariesForTwoSteps) {
  const auto p = with_n(2);
  const double b = rounding_threshold(p.precision) / 2;
  const auto iv = increasing_intervals(p, RegionScan{1.1 * p.a()});
  ASSERT_EQ(iv.size(), 4u);
  EXPECT_EQ(iv[0].lo, 0.0);
  EXPECT_NEAR(iv[0].hi, b, 1e-9);
  EXPECT_NEAR(iv[1].lo, 2 * pi * pi - b, 1e-9);
  EXPECT_NEAR(iv[1].hi, 2 * pi * pi + b, 1e-9);
  EXPECT_NEAR(iv[2].lo, 4 * pi * pi - b, 1e-9);
  EXPECT_NEAR(iv[2].hi, 4 * pi * pi + b, 1e-9);
  EXPECT_NEAR(iv[3].lo, p.a(), 1e-9);
  EXPECT_NEAR(iv[3].hi, 1.1 * p.a(), 1e-12);
}

TEST(Rounding, BoundariesStableUnderGridHalving) {
  const auto p = with_n(2);
  RegionScan coarse{1.1 * p.a(), 1e-2}, fine{1.1 * p.a(), 5e-3};
  const auto a = increasing_intervals(p, coarse);
  const auto b = increasing_intervals(p, fine);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].lo, b[i].lo, 1e-6);
    EXPECT_NEAR(a[i].hi, b[i].hi, 1e-6);
  }
}

TEST(Rounding, CoarserMachineWidensPlateaus) {
  auto p = with_n(2);
  p.precision = 1e-4;
  const auto coarse = numerically_constant_regions(p, RegionScan{1.1 * p.a()});
  const auto exact = numerically_constant_regions(with_n(2), RegionScan{1.1 * p.a()});
  ASSERT_EQ(coarse.size(), exact.size());
  EXPECT_LT(coarse[0].lo, exact[0].lo);
}

TEST(Rounding, ConstantRegionsAreFlat) {
  const auto p = with_n(2);
  for (const auto& iv : numerically_constant_regions(p, RegionScan{1.1 * p.a()})) {
    const double v = g(iv.lo + 1e-6, p);
    for (int j = 0; j <= 100; ++j) EXPECT_NEAR(g(iv.lo + 1e-6 + (iv.width() - 2e-6) * j / 100.0, p), v, 8 * p.precision);
  }
}

TEST(InfiniteN, TruncationKeepsStaircase) {
  const auto p = with_n(ExampleParams::kInfinite);
  const auto finite = with_n(8);
  for (double r = -100.0; r <= 100.0; r += 0.9) EXPECT_NEAR(g(r, p), g(r, finite), 1e-12) << r;
  EXPECT_EQ(p.input_scale(5.0), 0.0);
}

TEST(Gains, GeneralizedInverseFromAbove) {
  const auto p = with_n(2);
  const double delta = 0.5;
  const ScalarFn gamma = interconnection_gain(p, delta);
  for (double s = 0.0; s <= 60.0; s += 0.173) {
    const double target = h(s, p) / (1 - delta);
    const double x = gamma(s);
    EXPECT_GE(g(x, p), target) << s;
    if (x > 1e-9) EXPECT_LT(g(x - 1e-9, p), target + 1e-9) << s;
  }
  EXPECT_THROW(interconnection_gain(p, 0.0), std::invalid_argument);
  EXPECT_THROW(interconnection_gain(p, 1.0), std::invalid_argument);
}

TEST(Gains, SingleBranchForNZero) {
  const auto p = with_n(0);
  const ScalarFn gamma = interconnection_gain(p, 0.5);
  for (double s = 0.0; s <= 15.0; s += 0.25) EXPECT_GE(g(gamma(s), p), 2 * h(s, p));
}

TEST(Model, InvariantsHold) {
  const auto model = make_model(with_n(2), 0.5);
  const auto report = validate_model(model, BoxGrid::square(-60, 60, 121));
  EXPECT_TRUE(report.ok);
  EXPECT_LE(report.origin_residual, 1e-12);
  EXPECT_EQ(report.sandwich_violations, 0u);
}

TEST(Model, DensityAndRho) {
  const std::vector<double> x{1.0, -1.0};
  EXPECT_EQ(rho(x), 1.0);
  const auto d = density();
  std::vector<double> grad(2);
  d.grad_rho(std::vector<double>{0.5, 0.25}, grad);
  EXPECT_NEAR(grad[0], -std::exp(-0.75), 1e-15);
  EXPECT_EQ(grad[0], grad[1]);
}
