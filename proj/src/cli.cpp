#include "smallgain/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "smallgain/density.hpp"
#include "smallgain/exec.hpp"
#include "smallgain/iss_model.hpp"
#include "smallgain/sim.hpp"
#include "smallgain/svg_plot.hpp"

namespace smallgain::cli {

namespace fs = std::filesystem;

namespace {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_string(Expectation e) {
  switch (e) {
    case Expectation::pass: return "pass";
    case Expectation::fail: return "fail";
    case Expectation::none: return "none";
  }
  return "none";
}

Expectation expectation_from(const std::string& s) {
  if (s == "pass") return Expectation::pass;
  if (s == "fail") return Expectation::fail;
  if (s == "none") return Expectation::none;
  throw std::invalid_argument("expect must be pass, fail or none, got " + s);
}

std::string to_string(DensityRegionKind kind) {
  switch (kind) {
    case DensityRegionKind::box: return "box";
    case DensityRegionKind::dk: return "dk";
    case DensityRegionKind::constant_band: return "constant_band";
  }
  return "box";
}

DensityRegionKind region_kind_from(const std::string& s) {
  if (s == "box") return DensityRegionKind::box;
  if (s == "dk") return DensityRegionKind::dk;
  if (s == "constant_band") return DensityRegionKind::constant_band;
  throw std::invalid_argument("density region kind must be box, dk or constant_band, got " + s);
}

GateForm gate_from(const std::string& s) {
  if (s == "max_storage") return GateForm::max_storage;
  if (s == "componentwise") return GateForm::componentwise;
  throw std::invalid_argument("gate must be max_storage or componentwise, got " + s);
}

InputBounds inputs_from(const Json& j) {
  if (j.is_array() && j.size() == 2) return {number_from(j[0]), number_from(j[1])};
  throw std::invalid_argument("input bounds must be [u1, u2], got " + j.dump());
}

Json inputs_json(const InputBounds& u) { return Json::array({number(u.u1), number(u.u2)}); }

template <class T>
void read(const Json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

void read_number(const Json& j, const char* key, double& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = number_from(j.at(key));
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) throw std::invalid_argument(fmt::format("{} must be positive, got {}", name, value));
}

void ensure_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
}

void emit(const fs::path& path, const Json& j) {
  try {
    write_json(path, j);
  } catch (const std::runtime_error& e) {
    throw OutputError(e.what());
  }
}

void emit_text(const fs::path& path, const std::string& text) {
  try {
    write_text(path, text);
  } catch (const std::runtime_error& e) {
    throw OutputError(e.what());
  }
}

Json checks_json(const Checks& checks) {
  Json out = Json::array();
  for (const auto& c : checks) out.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

Json params_json(const example::ExampleParams& p) {
  return Json{{"n", p.infinite() ? Json("inf") : Json(p.n)},
              {"a", number(p.a())},
              {"u1_bound", number(p.u1_bound)},
              {"u2_bound", number(p.u2_bound)},
              {"precision", number(p.precision)}};
}

SgcAnalysis run_sgc(const RunConfig& config, const SystemModel& model) {
  SgcOptions options;
  if (config.sgc_grid_step > 0.0) options.grid_step = config.sgc_grid_step;
  options.refine_tol = config.sgc_refine_tol;
  return find_sgc_intervals(model.gamma_12, model.gamma_21, config.resolved_scan_bound(), options);
}

std::string describe(const SgcAnalysis& analysis) {
  std::string text = fmt::format("detected {} small-gain interval(s):", analysis.count());
  for (std::size_t i = 0; i < analysis.count(); ++i) {
    const auto& iv = analysis.intervals[i];
    text += fmt::format(" [{}] ({:.6g}, {:.6g}{}", i + 1, iv.lo, iv.hi, iv.right_open ? "]+" : ")");
  }
  text += fmt::format("; valid D_k indices are 1..{}", analysis.count() + 1);
  return text;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> xs(count);
  for (std::size_t j = 0; j < count; ++j)
    xs[j] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
  return xs;
}

}  // namespace

double RunConfig::resolved_scan_bound() const {
  if (scan_bound) return *scan_bound;
  if (params.infinite()) throw std::invalid_argument("scan_bound is required when n is infinite");
  return 1.1 * params.a();
}

void RunConfig::validate() const {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument(fmt::format("delta must lie in (0, 1), got {}", delta));
  require_positive(epsilon, "epsilon");
  require_positive(resolved_scan_bound(), "scan_bound");
  if (sgc_grid_step < 0.0) throw std::invalid_argument("sgc.grid_step must be nonnegative (0 selects the default)");
  require_positive(sgc_refine_tol, "sgc.refine_tol");
  if (gains_samples < 2) throw std::invalid_argument("gains.samples must be at least 2");
  iss_grid.validate();
  if (iss_grid.dim() != 2) throw std::invalid_argument("iss.grid must be two-dimensional");
  if (!(iss_u_bound >= 0.0)) throw std::invalid_argument("iss.u_bound must be nonnegative");
  if (iss_u_steps == 0) throw std::invalid_argument("iss.u_steps must be positive");
  require_positive(iss_slack_tol, "iss.slack_tol");
  for (const auto& r : density_regions) {
    const bool default_enclosing = r.kind == DensityRegionKind::dk && r.box.dim() == 0;
    if (r.kind != DensityRegionKind::constant_band && !default_enclosing) {
      r.box.validate();
      if (r.box.dim() != 2) throw std::invalid_argument("density region " + r.name + ": box must be two-dimensional");
    }
    if (!(r.u.u1 >= 0.0 && r.u.u2 >= 0.0)) throw std::invalid_argument("density region " + r.name + ": u must be nonnegative");
    if (!(r.measure_zero_budget >= 0.0 && r.measure_zero_budget <= 1.0))
      throw std::invalid_argument("density region " + r.name + ": measure_zero_budget must lie in [0, 1]");
    if (r.margin < 0.0 || r.margin >= 0.5) throw std::invalid_argument("density region " + r.name + ": margin must lie in [0, 0.5)");
  }
  simulate.grid.validate();
  if (simulate.grid.dim() != 2) throw std::invalid_argument("simulate.grid must be two-dimensional");
  require_positive(simulate.t_end, "simulate.t_end");
  require_positive(simulate.dt, "simulate.dt");
  require_positive(simulate.classify.conv_tol, "simulate.conv_tol");
  require_positive(simulate.classify.window_fraction, "simulate.window_fraction");
  require_positive(simulate.classify.escape_bound, "simulate.escape_bound");
  if (simulate.record_stride == 0) throw std::invalid_argument("simulate.record_stride must be positive");
  for (const auto& x0 : simulate.initial_conditions)
    if (x0.size() != 2) throw std::invalid_argument("simulate.initial_conditions entries must be [x1, x2]");
  require_positive(figures.t_end, "figures.t_end");
  require_positive(figures.dt, "figures.dt");
  require_positive(figures.forced_circle, "figures.forced_circle");
  if (figures.record_stride == 0 || figures.autonomous_steps == 0 || figures.forced_steps == 0 || figures.gh_samples < 2)
    throw std::invalid_argument("figures: strides, grid steps and samples must be positive");
}

RunConfig default_config() {
  RunConfig config;
  DensityRegionSpec origin;
  origin.name = "origin";
  origin.box = BoxGrid::square(-0.1, 0.1, 40, true);
  origin.expect = Expectation::fail;

  DensityRegionSpec quadrant;
  quadrant.name = "negative_quadrant";
  quadrant.box = BoxGrid::square(-60.0, -0.1, 200);
  quadrant.expect = Expectation::pass;

  DensityRegionSpec band;
  band.name = "band_r1";
  band.kind = DensityRegionKind::constant_band;
  band.k = 1;
  band.margin = 0.01;
  band.gate = GateForm::componentwise;
  band.example_gamma = true;
  band.u = {3.0, 4.0};
  band.expect = Expectation::pass;

  config.density_regions = {origin, quadrant, band};
  return config;
}

RunConfig config_from_json(const Json& j) {
  RunConfig config = default_config();
  if (j.contains("example")) {
    const auto& e = j.at("example");
    if (e.contains("n")) {
      const auto& n = e.at("n");
      if (n.is_string() && (n.get<std::string>() == "inf" || n.get<std::string>() == "infinity"))
        config.params.n = example::ExampleParams::kInfinite;
      else
        config.params.n = n.get<int>();
    }
    read_number(e, "u1_bound", config.params.u1_bound);
    read_number(e, "u2_bound", config.params.u2_bound);
    read_number(e, "precision", config.params.precision);
    read_number(e, "eval_range", config.params.eval_range);
  }
  read_number(j, "delta", config.delta);
  read_number(j, "epsilon", config.epsilon);
  if (j.contains("scan_bound") && !j.at("scan_bound").is_null()) config.scan_bound = number_from(j.at("scan_bound"));
  if (j.contains("sgc")) {
    read_number(j.at("sgc"), "grid_step", config.sgc_grid_step);
    read_number(j.at("sgc"), "refine_tol", config.sgc_refine_tol);
  }
  if (j.contains("gains")) read(j.at("gains"), "samples", config.gains_samples);
  if (j.contains("iss")) {
    const auto& s = j.at("iss");
    if (s.contains("grid")) config.iss_grid = box_from_json(s.at("grid"));
    read_number(s, "u_bound", config.iss_u_bound);
    read(s, "u_steps", config.iss_u_steps);
    read_number(s, "slack_tol", config.iss_slack_tol);
  }
  if (j.contains("density") && j.at("density").contains("regions")) {
    config.density_regions.clear();
    for (const auto& r : j.at("density").at("regions")) {
      DensityRegionSpec spec;
      spec.name = r.at("name").get<std::string>();
      if (r.contains("kind")) spec.kind = region_kind_from(r.at("kind").get<std::string>());
      if (r.contains("box")) spec.box = box_from_json(r.at("box"));
      else if (spec.kind == DensityRegionKind::box) throw std::invalid_argument("density region " + spec.name + " needs a box");
      if (spec.kind == DensityRegionKind::dk && !r.contains("box")) spec.box = BoxGrid{};
      read(r, "k", spec.k);
      read_number(r, "margin", spec.margin);
      read(r, "steps", spec.steps);
      if (r.contains("gate")) spec.gate = gate_from(r.at("gate").get<std::string>());
      if (r.contains("gamma")) {
        const auto g = r.at("gamma").get<std::string>();
        if (g != "identity" && g != "example") throw std::invalid_argument("gamma must be identity or example, got " + g);
        spec.example_gamma = g == "example";
      }
      if (r.contains("u")) spec.u = inputs_from(r.at("u"));
      read_number(r, "q_tol", spec.q_tol);
      read_number(r, "measure_zero_budget", spec.measure_zero_budget);
      if (r.contains("expect")) spec.expect = expectation_from(r.at("expect").get<std::string>());
      config.density_regions.push_back(spec);
    }
  }
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    auto& sim = config.simulate;
    if (s.contains("grid")) sim.grid = box_from_json(s.at("grid"));
    if (s.contains("u") && !s.at("u").is_null()) sim.u = inputs_from(s.at("u"));
    read_number(s, "t_end", sim.t_end);
    read_number(s, "dt", sim.dt);
    read_number(s, "conv_tol", sim.classify.conv_tol);
    read_number(s, "window_fraction", sim.classify.window_fraction);
    read_number(s, "escape_bound", sim.classify.escape_bound);
    read(s, "record_stride", sim.record_stride);
    if (s.contains("initial_conditions")) sim.initial_conditions = s.at("initial_conditions").get<std::vector<std::vector<double>>>();
    read_number(s, "max_nonconverging_fraction", sim.max_nonconverging_fraction);
    read(s, "require_all_converged", sim.require_all_converged);
    if (s.contains("radius_bound") && !s.at("radius_bound").is_null()) sim.radius_bound = number_from(s.at("radius_bound"));
  }
  if (j.contains("figures")) {
    const auto& f = j.at("figures");
    auto& fig = config.figures;
    read_number(f, "t_end", fig.t_end);
    read_number(f, "dt", fig.dt);
    read(f, "record_stride", fig.record_stride);
    read(f, "autonomous_steps", fig.autonomous_steps);
    read(f, "forced_steps", fig.forced_steps);
    if (f.contains("forced_u")) fig.forced_u = inputs_from(f.at("forced_u"));
    read_number(f, "forced_circle", fig.forced_circle);
    read(f, "gh_samples", fig.gh_samples);
  }
  if (j.contains("out")) config.out = j.at("out").get<std::string>();
  read(j, "threads", config.threads);
  return config;
}

Json config_to_json(const RunConfig& c) {
  Json regions = Json::array();
  for (const auto& r : c.density_regions) {
    Json spec{{"name", r.name}, {"kind", to_string(r.kind)}};
    if (r.kind != DensityRegionKind::constant_band && r.box.dim() > 0) spec["box"] = to_json(r.box);
    spec["k"] = r.k;
    spec["margin"] = number(r.margin);
    spec["steps"] = r.steps;
    spec["gate"] = to_string(r.gate);
    spec["gamma"] = r.example_gamma ? "example" : "identity";
    spec["u"] = inputs_json(r.u);
    spec["q_tol"] = number(r.q_tol);
    spec["measure_zero_budget"] = number(r.measure_zero_budget);
    spec["expect"] = to_string(r.expect);
    regions.push_back(spec);
  }
  const auto& s = c.simulate;
  const auto& f = c.figures;
  return Json{
      {"example", params_json(c.params)},
      {"delta", number(c.delta)},
      {"epsilon", number(c.epsilon)},
      {"scan_bound", number(c.resolved_scan_bound())},
      {"sgc", {{"grid_step", number(c.sgc_grid_step)}, {"refine_tol", number(c.sgc_refine_tol)}}},
      {"gains", {{"samples", c.gains_samples}}},
      {"iss", {{"grid", to_json(c.iss_grid)}, {"u_bound", number(c.iss_u_bound)}, {"u_steps", c.iss_u_steps}, {"slack_tol", number(c.iss_slack_tol)}}},
      {"density", {{"regions", regions}}},
      {"simulate",
       {{"grid", to_json(s.grid)},
        {"u", s.u ? inputs_json(*s.u) : Json()},
        {"t_end", number(s.t_end)},
        {"dt", number(s.dt)},
        {"conv_tol", number(s.classify.conv_tol)},
        {"window_fraction", number(s.classify.window_fraction)},
        {"escape_bound", number(s.classify.escape_bound)},
        {"record_stride", s.record_stride},
        {"initial_conditions", s.initial_conditions},
        {"max_nonconverging_fraction", number(s.max_nonconverging_fraction)},
        {"require_all_converged", s.require_all_converged},
        {"radius_bound", s.radius_bound ? number(*s.radius_bound) : Json()}}},
      {"figures",
       {{"t_end", number(f.t_end)},
        {"dt", number(f.dt)},
        {"record_stride", f.record_stride},
        {"autonomous_steps", f.autonomous_steps},
        {"forced_steps", f.forced_steps},
        {"forced_u", inputs_json(f.forced_u)},
        {"forced_circle", number(f.forced_circle)},
        {"gh_samples", f.gh_samples}}},
  };
}

Checks cmd_gains(const RunConfig& config) {
  ensure_out(config.out);
  const SystemModel model = example::make_model(config.params, config.delta);
  const double bound = config.resolved_scan_bound();
  const auto s = linspace(0.0, bound, config.gains_samples);
  PlotSeries g12{{}, {}, "#1f77b4", 1.5, "gamma_12"}, g21{{}, {}, "#ff7f0e", 1.5, "gamma_21"};
  PlotSeries comp{{}, {}, "#2ca02c", 1.5, "gamma_12 o gamma_21"}, id{{}, {}, "black", 1.0, "id"};
  std::string csv = "s,g12,g21,comp,id\n";
  for (double x : s) {
    const double a = model.gamma_12(x), b = model.gamma_21(x), c = model.gamma_12(b);
    csv += fmt::format("{},{},{},{},{}\n", format_g17(x), format_g17(a), format_g17(b), format_g17(c), format_g17(x));
    for (auto* series : {&g12, &g21, &comp, &id}) series->x.push_back(x);
    g12.y.push_back(a);
    g21.y.push_back(b);
    comp.y.push_back(c);
    id.y.push_back(x);
  }
  emit_text(config.out / "gains.csv", csv);
  Plot plot;
  plot.title = fmt::format("interconnection gains, n = {}, delta = {}", config.params.n, config.delta);
  plot.x_label = "s";
  plot.y_label = "gain";
  plot.series = {id, g12, g21, comp};
  emit_text(config.out / "gains.svg", render_svg(plot));
  return {Check{"gains.written", true, fmt::format("{} samples on [0, {}]", s.size(), bound)}};
}

Checks cmd_sgc(const RunConfig& config) {
  ensure_out(config.out);
  const SystemModel model = example::make_model(config.params, config.delta);
  const SgcAnalysis analysis = run_sgc(config, model);
  const double bound = config.resolved_scan_bound();
  example::RegionScan scan{bound};
  const auto increasing = example::increasing_intervals(config.params, scan);
  const auto constant = example::numerically_constant_regions(config.params, scan);

  Json j{{"example", params_json(config.params)}, {"delta", number(config.delta)}};
  const Json analysis_json = to_json(analysis);
  for (const auto& [key, value] : analysis_json.items()) j[key] = value;
  Json regions = Json::array();
  for (std::size_t k = 1; k <= analysis.count(); ++k)
    regions.push_back(Json{{"k", k}, {"a", to_json(region_a(analysis, model, k))}, {"b", to_json(region_b(analysis, model, k))}});
  j["regions"] = regions;
  Json inc = Json::array(), con = Json::array();
  for (const auto& iv : increasing) inc.push_back(to_json(iv));
  for (const auto& iv : constant) con.push_back(to_json(iv));
  j["increasing_intervals"] = inc;
  j["increasing_count"] = increasing.size();
  j["numerically_constant_regions"] = con;
  j["rounding_threshold"] = number(example::rounding_threshold(config.params.precision));

  Checks checks;
  if (!config.params.infinite()) {
    const auto expected = static_cast<std::size_t>(config.params.n + 2);
    checks.push_back({"sgc.increasing_count", increasing.size() == expected,
                      fmt::format("{} increasing intervals on [0, {}], expected n + 2 = {}", increasing.size(), bound, expected)});
  }
  checks.push_back({"sgc.intervals_found", analysis.count() > 0, describe(analysis)});
  j["checks"] = checks_json(checks);
  emit(config.out / "sgc.json", j);
  return checks;
}

namespace {

DensityRegion build_region(const DensityRegionSpec& spec, const RunConfig& config, const SystemModel& model,
                           const std::optional<SgcAnalysis>& analysis) {
  switch (spec.kind) {
    case DensityRegionKind::box:
      return DensityRegion{spec.name, spec.box, std::nullopt, std::nullopt};
    case DensityRegionKind::dk: {
      if (spec.k < 1 || spec.k > analysis->count() + 1)
        throw std::invalid_argument(fmt::format("density region {}: D_{} overlaps no detected region; {}", spec.name,
                                                spec.k, describe(*analysis)));
      BoxGrid enclosing = spec.box;
      if (enclosing.dim() == 0) {
        const double b = config.resolved_scan_bound();
        enclosing = BoxGrid::square(0.0, b, 241);
      }
      DensityRegion region = make_dk_region(*analysis, model, spec.k, enclosing, spec.margin);
      region.name = spec.name;
      return region;
    }
    case DensityRegionKind::constant_band: {
      const auto eq = example::equilibria(config.params);
      if (spec.k >= eq.size())
        throw std::invalid_argument(fmt::format("density region {}: no equilibrium r_{} (n = {})", spec.name, spec.k, config.params.n));
      const double r = eq[spec.k];
      const auto constant = example::numerically_constant_regions(config.params, example::RegionScan{config.resolved_scan_bound()});
      for (const auto& iv : constant)
        if (iv.contains(r)) {
          const double shrink = spec.margin * iv.width();
          const double lo = iv.lo + shrink, hi = iv.hi - shrink;
          return DensityRegion{spec.name, BoxGrid::square(lo, hi, spec.steps), std::nullopt, std::nullopt};
        }
      throw std::invalid_argument(fmt::format("density region {}: r_{} = {} lies in no numerically constant region",
                                              spec.name, spec.k, r));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Checks cmd_density(const RunConfig& config) {
  ensure_out(config.out);
  const SystemModel model = example::make_model(config.params, config.delta);
  const DensityFn rho = example::density();
  std::optional<SgcAnalysis> analysis;
  for (const auto& spec : config.density_regions)
    if (spec.kind == DensityRegionKind::dk && !analysis) analysis = run_sgc(config, model);

  // Resolve every region first so a bad reference fails before any output.
  std::vector<DensityRegion> regions;
  for (const auto& spec : config.density_regions) regions.push_back(build_region(spec, config, model, analysis));

  Checks checks;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& spec = config.density_regions[r];
    DensityGate gate{spec.gate, ScalarFn::identity()};
    if (spec.example_gamma) {
      GammaKOptions opts;
      opts.precision = config.params.precision;
      gate.gamma_k = derive_gamma_k_example(config.delta, config.epsilon, config.params.n, opts);
    }
    DensityCheckOptions options;
    options.q_tol = spec.q_tol;
    options.measure_zero_budget = spec.measure_zero_budget;
    const auto report = check_density_propagation(rho, model, regions[r], gate, spec.u, options);

    const bool met = spec.expect == Expectation::none || (spec.expect == Expectation::pass) == report.passed;
    const std::string detail =
        fmt::format("{}: expected {}, violation_fraction = {}, min_divergence = {}, gated = {}", spec.name,
                    to_string(spec.expect), report.violation_fraction, report.min_divergence, report.gated);
    Json j = to_json(report);
    j["expect"] = to_string(spec.expect);
    j["expectation_met"] = met;
    if (analysis) j["sgc_intervals"] = to_json(*analysis);
    emit(config.out / fmt::format("density_{}.json", spec.name), j);
    checks.push_back({"density." + spec.name, met, detail});
  }
  return checks;
}

Checks cmd_simulate(const RunConfig& config) {
  ensure_out(config.out);
  const auto& sim = config.simulate;
  const SystemModel model = example::make_model(config.params, config.delta);
  const InputBounds u = sim.u.value_or(config.params.inputs());

  SweepOptions options;
  options.t_end = sim.t_end;
  options.dt = sim.dt;
  options.classify = sim.classify;
  options.equilibria = example::equilibrium_states(config.params);
  const SweepReport report = sweep(model, u, sim.grid, options);

  Checks checks;
  checks.push_back({"simulate.nonconverging_fraction", report.nonconverging_fraction <= sim.max_nonconverging_fraction,
                    fmt::format("nonconverging_fraction = {} (limit {})", report.nonconverging_fraction,
                                sim.max_nonconverging_fraction)});
  if (sim.require_all_converged)
    checks.push_back({"simulate.all_converged", report.converged == report.cells.size(),
                      fmt::format("{} of {} cells converged to an equilibrium", report.converged, report.cells.size())});
  if (sim.radius_bound)
    checks.push_back({"simulate.radius", report.estimated_radius <= *sim.radius_bound,
                      fmt::format("estimated_radius = {} (bound {})", report.estimated_radius, *sim.radius_bound)});

  Json trajectories = Json::array();
  IntegrateOptions io;
  io.record_stride = sim.record_stride;
  for (std::size_t i = 0; i < sim.initial_conditions.size(); ++i) {
    Trajectory traj = integrate(model, sim.initial_conditions[i], u, sim.t_end, sim.dt, io);
    traj.classification = classify(traj, options.equilibria, sim.classify);
    const auto name = fmt::format("trajectory_{}.csv", i);
    try {
      write_trajectory_csv(config.out / name, traj);
    } catch (const std::runtime_error& e) {
      throw OutputError(e.what());
    }
    trajectories.push_back(Json{{"file", name},
                                {"x0", sim.initial_conditions[i]},
                                {"classification", to_string(traj.classification.kind)},
                                {"equilibrium", traj.classification.equilibrium},
                                {"final", Json::array({number(traj.state(traj.size() - 1)[0]), number(traj.state(traj.size() - 1)[1])})},
                                {"error_estimate", number(traj.error_estimate)}});
  }

  Json j = to_json(report);
  j["equilibria"] = options.equilibria;
  j["trajectories"] = trajectories;
  j["checks"] = checks_json(checks);
  emit(config.out / "sweep.json", j);
  try {
    write_sweep_csv(config.out / "sweep.csv", report);
  } catch (const std::runtime_error& e) {
    throw OutputError(e.what());
  }
  return checks;
}

namespace {

struct Portrait {
  Plot plot;
  std::string csv;
};

Portrait portrait(const SystemModel& model, const InputBounds& u, const BoxGrid& grid, const FiguresConfig& fig) {
  Portrait out;
  out.csv = "id,t,x1,x2\n";
  IntegrateOptions io;
  io.record_stride = fig.record_stride;
  io.estimate_error = false;
  std::vector<Trajectory> runs(grid.size());
  for_each_index(grid.size(), Execution::parallel, [&](std::size_t idx) {
    std::vector<double> x0(2);
    grid.point(idx, x0);
    runs[idx] = integrate(model, x0, u, fig.t_end, fig.dt, io);
  });
  for (std::size_t idx = 0; idx < runs.size(); ++idx) {
    const auto& traj = runs[idx];
    PlotSeries series{{}, {}, "#1f77b4", 1.0, ""};
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto x = traj.state(k);
      out.csv += fmt::format("{},{},{},{}\n", idx, format_g17(traj.times[k]), format_g17(x[0]), format_g17(x[1]));
      series.x.push_back(x[0]);
      series.y.push_back(x[1]);
    }
    out.plot.series.push_back(series);
    out.plot.markers.push_back(PlotMarker{traj.state(0)[0], traj.state(0)[1], 3.0, "black", "none"});
  }
  out.plot.x_label = "x1";
  out.plot.y_label = "x2";
  out.plot.equal_aspect = true;
  out.plot.x_range = std::pair{grid.lo[0], grid.hi[0]};
  out.plot.y_range = std::pair{grid.lo[1], grid.hi[1]};
  return out;
}

}  // namespace

Checks cmd_figures(const RunConfig& config) {
  ensure_out(config.out);
  const auto& fig = config.figures;
  example::ExampleParams params = config.params;
  if (params.infinite()) throw std::invalid_argument("figures need a finite n");

  // g and h on [0, 1.1 a].
  const double hi = 1.1 * params.a();
  Plot gh;
  gh.title = fmt::format("g and h, n = {}", params.n);
  gh.x_label = "r";
  gh.y_label = "value";
  PlotSeries gs{{}, {}, "#1f77b4", 1.5, "g"}, hs{{}, {}, "#d62728", 1.5, "h"};
  std::string csv = "r,g,h\n";
  for (double r : linspace(0.0, hi, fig.gh_samples)) {
    const double gv = example::g(r, params), hv = example::h(r, params);
    csv += fmt::format("{},{},{}\n", format_g17(r), format_g17(gv), format_g17(hv));
    gs.x.push_back(r);
    gs.y.push_back(gv);
    hs.x.push_back(r);
    hs.y.push_back(hv);
  }
  gh.series = {gs, hs};
  emit_text(config.out / "fig1_gh.csv", csv);
  emit_text(config.out / "fig1_gh.svg", render_svg(gh));

  params.u1_bound = params.u2_bound = 0.0;
  const SystemModel autonomous = example::make_model(params, config.delta);
  auto fig2 = portrait(autonomous, {}, BoxGrid::square(0.0, 60.0, fig.autonomous_steps), fig);
  fig2.plot.title = "autonomous system, u = 0";
  const auto eq = example::equilibria(params);
  if (eq.size() > 1) fig2.plot.markers.push_back(PlotMarker{eq[1], eq[1], 5.0, "#d62728", "#d62728"});
  emit_text(config.out / "fig2_autonomous.csv", fig2.csv);
  emit_text(config.out / "fig2_autonomous.svg", render_svg(fig2.plot));

  params.u1_bound = fig.forced_u.u1;
  params.u2_bound = fig.forced_u.u2;
  const SystemModel forced = example::make_model(params, config.delta);
  auto fig3 = portrait(forced, fig.forced_u, BoxGrid::square(-20.0, 20.0, fig.forced_steps), fig);
  fig3.plot.title = fmt::format("forced system, u bounds ({}, {})", fig.forced_u.u1, fig.forced_u.u2);
  fig3.plot.circles.push_back(PlotCircle{0.0, 0.0, fig.forced_circle, "black", "none", 2.5});
  emit_text(config.out / "fig3_forced.csv", fig3.csv);
  emit_text(config.out / "fig3_forced.svg", render_svg(fig3.plot));

  return {Check{"figures.written", true, "fig1_gh, fig2_autonomous, fig3_forced (.svg and .csv)"}};
}

Checks cmd_iss(const RunConfig& config) {
  ensure_out(config.out);
  const SystemModel model = example::make_model(config.params, config.delta);
  IssCheckOptions options;
  options.u_bound = config.iss_u_bound;
  options.u_steps = config.iss_u_steps;
  options.slack_tol = config.iss_slack_tol;
  Checks checks;
  Json reports = Json::array();
  for (int i = 1; i <= 2; ++i) {
    const auto report = check_iss_lyapunov(model, i, config.iss_grid, options);
    reports.push_back(to_json(report));
    checks.push_back({fmt::format("iss.subsystem_{}", i), report.passed(),
                      fmt::format("{} violations over {} gated of {} samples, worst margin {}", report.violation_count,
                                  report.gated, report.samples, report.worst_margin)});
  }
  emit(config.out / "iss.json", Json{{"delta", number(config.delta)}, {"reports", reports}, {"checks", checks_json(checks)}});
  return checks;
}

Checks cmd_check_all(const RunConfig& config) {
  Checks all;
  for (auto* command : {&cmd_gains, &cmd_sgc, &cmd_iss, &cmd_density, &cmd_simulate, &cmd_figures}) {
    Checks part = command(config);
    all.insert(all.end(), part.begin(), part.end());
  }
  std::size_t failed = 0;
  for (const auto& c : all) failed += c.passed ? 0 : 1;
  emit(config.out / "summary.json",
       Json{{"config", config_to_json(config)}, {"checks", checks_json(all)}, {"failed", failed}, {"passed", failed == 0}});
  return all;
}

int run(int argc, char** argv) {
  CLI::App app{"Small-gain and density-propagation analysis of a two-subsystem ISS example"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 0;
  std::optional<int> n;
  std::optional<double> delta, epsilon, u1, u2, precision, scan_bound, t_end, dt;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  app.add_option("--n", n, "number of tanh steps (-1 for infinity)");
  app.add_option("--delta", delta, "gain construction delta in (0, 1)");
  app.add_option("--epsilon", epsilon, "epsilon of the m-function gate");
  app.add_option("--u1", u1, "input bound |u_1|");
  app.add_option("--u2", u2, "input bound |u_2|");
  app.add_option("--precision", precision, "rounding threshold p");
  app.add_option("--scan-bound", scan_bound, "upper end of the small-gain scan");
  app.add_option("--t-end", t_end, "simulation horizon");
  app.add_option("--dt", dt, "RK4 step");
  app.fallthrough();

  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gains", "interconnection gains as CSV and SVG"},
      {"sgc", "small-gain intervals and numerically constant regions"},
      {"density", "density propagation checks per configured region"},
      {"simulate", "initial-condition sweep and trajectories"},
      {"figures", "g/h plot and phase portraits"},
      {"check-all", "every command above plus the ISS-Lyapunov grid check"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      config = config_from_json(Json::parse(in));
    } else {
      config = default_config();
    }
    if (!out_dir.empty()) config.out = out_dir;
    if (threads > 0) config.threads = threads;
    if (n) config.params.n = *n < 0 ? example::ExampleParams::kInfinite : *n;
    if (delta) config.delta = *delta;
    if (epsilon) config.epsilon = *epsilon;
    if (u1) config.params.u1_bound = *u1;
    if (u2) config.params.u2_bound = *u2;
    if (precision) config.params.precision = *precision;
    if (scan_bound) config.scan_bound = *scan_bound;
    if (t_end) config.simulate.t_end = *t_end;
    if (dt) config.simulate.dt = *dt;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  }
  set_thread_count(config.threads);

  Checks checks;
  try {
    if (chosen == "gains") checks = cmd_gains(config);
    else if (chosen == "sgc") checks = cmd_sgc(config);
    else if (chosen == "density") checks = cmd_density(config);
    else if (chosen == "simulate") checks = cmd_simulate(config);
    else if (chosen == "figures") checks = cmd_figures(config);
    else checks = cmd_check_all(config);
  } catch (const OutputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace smallgain::cli
