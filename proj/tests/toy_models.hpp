#pragma once

#include "smallgain/iss_model.hpp"

namespace toy {

// x1' = -x1 + c x2 + u, x2' = -x2 + c x1 + u with V_i = |x_i|.
// Under |x_i| >= max(2c |x_j|, 4u): V_i' <= -|x_i| / 4.
inline smallgain::SystemModel coupled_linear(double c) {
  using namespace smallgain;
  SystemModel m;
  m.f1 = [c](std::span<const double> x1, std::span<const double> x2, double u, std::span<double> dx) {
    dx[0] = -x1[0] + c * x2[0] + u;
  };
  m.f2 = [c](std::span<const double> x1, std::span<const double> x2, double u, std::span<double> dx) {
    dx[0] = -x2[0] + c * x1[0] + u;
  };
  m.v1 = m.v2 = StorageFunction::abs_value();
  m.gamma_12 = m.gamma_21 = ScalarFn::linear(2.0 * c);
  m.gamma_1 = m.gamma_2 = ScalarFn::linear(4.0);
  m.alpha_1 = m.alpha_2 = ScalarFn::linear(0.25);
  m.divergence_f = [](std::span<const double>, const InputBounds&) { return -2.0; };
  m.label = "coupled linear";
  return m;
}

// x' = -x componentwise.
inline smallgain::SystemModel decoupled_decay() { return coupled_linear(0.0); }

}  // namespace toy
