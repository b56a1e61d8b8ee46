#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/example_system.hpp"
#include "smallgain/grid.hpp"
#include "smallgain/json_io.hpp"

namespace smallgain::cli {

enum class Expectation { pass, fail, none };

enum class DensityRegionKind { box, dk, constant_band };

struct DensityRegionSpec {
  std::string name;
  DensityRegionKind kind = DensityRegionKind::box;
  BoxGrid box;                      // box: the region; dk: the enclosing box
  std::size_t k = 1;                // dk index, or band around equilibrium r_k
  double margin = 0.05;             // dk dilation; band shrink (fraction of width)
  std::size_t steps = 101;          // band grid points per axis
  GateForm gate = GateForm::max_storage;
  bool example_gamma = false;       // gamma_k from the m-function construction, else identity
  InputBounds u;
  double q_tol = 0.0;
  double measure_zero_budget = 0.0;
  Expectation expect = Expectation::none;
};

struct SimulateConfig {
  BoxGrid grid = BoxGrid::square(0.0, 60.0, 50);
  std::optional<InputBounds> u;  // defaults to the example's input bounds
  double t_end = 50.0;
  double dt = 1e-3;
  ClassifyOptions classify;
  std::size_t record_stride = 10;
  std::vector<std::vector<double>> initial_conditions{{1.0, 1.0}, {45.0, 5.0}};
  double max_nonconverging_fraction = 0.0;
  bool require_all_converged = false;
  std::optional<double> radius_bound;
};

struct FiguresConfig {
  double t_end = 10.0;
  double dt = 1e-3;
  std::size_t record_stride = 20;
  std::size_t autonomous_steps = 7;
  std::size_t forced_steps = 7;
  InputBounds forced_u{3.0, 4.0};
  double forced_circle = 5.0;
  std::size_t gh_samples = 2001;
};

struct RunConfig {
  example::ExampleParams params;
  double delta = 0.5;
  double epsilon = 1.0;
  std::optional<double> scan_bound;  // defaults to 1.1 a
  double sgc_grid_step = 0.0;        // defaults to 1e-3 scan_bound
  double sgc_refine_tol = 1e-9;
  std::size_t gains_samples = 2001;

  BoxGrid iss_grid = BoxGrid::square(-60.0, 60.0, 481);
  double iss_u_bound = 0.0;
  std::size_t iss_u_steps = 1;
  double iss_slack_tol = 1e-9;

  std::vector<DensityRegionSpec> density_regions;
  SimulateConfig simulate;
  FiguresConfig figures;

  std::filesystem::path out = "out";
  int threads = 0;  // 0 keeps the OpenMP default

  double resolved_scan_bound() const;
  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

RunConfig default_config();
/// Missing keys keep their defaults.
RunConfig config_from_json(const Json& j);
Json config_to_json(const RunConfig& config);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

using Checks = std::vector<Check>;

/// Command bodies; each writes into config.out and returns its checks.
/// Configuration problems throw std::invalid_argument.
Checks cmd_gains(const RunConfig& config);
Checks cmd_sgc(const RunConfig& config);
Checks cmd_density(const RunConfig& config);
Checks cmd_simulate(const RunConfig& config);
Checks cmd_figures(const RunConfig& config);
Checks cmd_iss(const RunConfig& config);
Checks cmd_check_all(const RunConfig& config);

/// Exit codes: 0 all checks passed, 1 a check failed, 2 usage or config
/// error, 3 output error.
int run(int argc, char** argv);

}  // namespace smallgain::cli
