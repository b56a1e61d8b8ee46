#include "smallgain/json_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace smallgain {

Json number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double number_from(const Json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw std::invalid_argument("expected a number, got " + value.dump());
}

namespace {

Json numbers(std::span<const double> xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

Json inputs(const InputBounds& u) { return Json{{"u1", number(u.u1)}, {"u2", number(u.u2)}}; }

Json classify_options(const ClassifyOptions& c) {
  return Json{{"conv_tol", number(c.conv_tol)},
              {"window_fraction", number(c.window_fraction)},
              {"escape_bound", number(c.escape_bound)}};
}

}  // namespace

Json to_json(const BoxGrid& grid) {
  Json steps = Json::array();
  for (auto s : grid.steps) steps.push_back(s);
  return Json{{"lo", numbers(grid.lo)}, {"hi", numbers(grid.hi)}, {"steps", steps}, {"open", grid.open}};
}

BoxGrid box_from_json(const Json& j) {
  BoxGrid grid;
  for (const auto& v : j.at("lo")) grid.lo.push_back(number_from(v));
  for (const auto& v : j.at("hi")) grid.hi.push_back(number_from(v));
  for (const auto& v : j.at("steps")) grid.steps.push_back(v.get<std::size_t>());
  grid.open = j.value("open", false);
  grid.validate();
  return grid;
}

Json to_json(const Interval& interval) {
  return Json{{"lo", number(interval.lo)}, {"hi", number(interval.hi)}};
}

Json to_json(const SgcAnalysis& analysis) {
  Json intervals = Json::array();
  for (const auto& iv : analysis.intervals)
    intervals.push_back(Json{{"lo", number(iv.lo)},
                             {"hi", number(iv.hi)},
                             {"right_open", iv.right_open},
                             {"lo_residual", number(iv.lo_residual)},
                             {"hi_residual", number(iv.hi_residual)}});
  return Json{{"intervals", intervals},
              {"count", analysis.count()},
              {"scan_bound", number(analysis.scan_bound)},
              {"grid_step", number(analysis.grid_step)},
              {"refine_tol", number(analysis.refine_tol)}};
}

Json to_json(const Region& region) {
  return Json{{"kind", to_string(region.kind)},
              {"k", region.k},
              {"v1_cap", number(region.v1_cap)},
              {"v2_cap", number(region.v2_cap)},
              {"unbounded", region.unbounded}};
}

Json to_json(const IssLyapunovReport& report) {
  Json violations = Json::array();
  for (const auto& v : report.violations)
    violations.push_back(Json{{"x", numbers(v.x)}, {"u", number(v.u)}, {"vdot", number(v.vdot)}, {"bound", number(v.bound)}});
  return Json{{"subsystem", report.subsystem},
              {"grid", to_json(report.grid)},
              {"u_bound", number(report.u_bound)},
              {"u_steps", report.u_steps},
              {"slack_tol", number(report.slack_tol)},
              {"samples", report.samples},
              {"gated", report.gated},
              {"violation_count", report.violation_count},
              {"worst_margin", number(report.worst_margin)},
              {"directional_samples", report.directional_samples},
              {"nonsmooth_samples", report.nonsmooth_samples},
              {"passed", report.passed()},
              {"violations", violations}};
}

Json to_json(const DensityCheckReport& report) {
  Json region{{"name", report.region.name}, {"box", to_json(report.region.box)}};
  region["outer"] = report.region.outer ? to_json(*report.region.outer) : Json();
  region["inner"] = report.region.inner ? to_json(*report.region.inner) : Json();
  Json violations = Json::array();
  for (const auto& v : report.violations)
    violations.push_back(Json{{"x", numbers(v.x)}, {"divergence", number(v.divergence)}});
  return Json{{"region", region},
              {"gate_form", to_string(report.gate_form)},
              {"gamma_k", report.gamma_label},
              {"u", inputs(report.u)},
              {"q_tol", number(report.q_tol)},
              {"measure_zero_budget", number(report.measure_zero_budget)},
              {"points", report.points},
              {"gated", report.gated},
              {"violation_count", report.violation_count},
              {"violation_fraction", number(report.violation_fraction)},
              {"min_divergence", number(report.min_divergence)},
              {"q_floor", number(report.q_floor)},
              {"inconclusive", report.inconclusive},
              {"passed", report.passed},
              {"violations", violations}};
}

Json to_json(const NeighborhoodCertificate& c) {
  return Json{{"epsilon", number(c.epsilon)},
              {"certified", c.certified},
              {"steps", c.steps},
              {"max_divergence", number(c.max_divergence)}};
}

Json to_json(const SweepReport& report) {
  Json classes = Json::object();
  classes["converged_to_equilibrium"] = report.converged;
  classes["entered_ball"] = report.entered_ball;
  classes["escaped"] = report.escaped;
  classes["undecided"] = report.undecided;
  Json per_equilibrium = Json::object();
  for (const auto& cell : report.cells)
    if (cell.classification.kind == Classification::Kind::converged_to_equilibrium) {
      const auto key = std::to_string(cell.classification.equilibrium);
      per_equilibrium[key] = per_equilibrium.value(key, 0) + 1;
    }
  return Json{{"note", "grid fraction estimates, but cannot certify, almost-every-initial-condition behaviour"},
              {"grid", to_json(report.grid)},
              {"u", inputs(report.u)},
              {"t_end", number(report.t_end)},
              {"dt", number(report.dt)},
              {"classify", classify_options(report.classify)},
              {"cells", report.cells.size()},
              {"classes", classes},
              {"converged_by_equilibrium", per_equilibrium},
              {"nonconverging_fraction", number(report.nonconverging_fraction)},
              {"estimated_radius", number(report.estimated_radius)}};
}

Json to_json(const Theorem1Report& report) {
  return Json{{"k", report.k},
              {"u", inputs(report.u)},
              {"a", to_json(report.a)},
              {"b", to_json(report.b)},
              {"samples", report.samples},
              {"converged", report.converged},
              {"fraction", number(report.fraction)},
              {"neighborhood_radius", number(report.neighborhood_radius)},
              {"worst_x0", numbers(report.worst_x0)},
              {"worst_end", numbers(report.worst_end)},
              {"worst_distance", number(report.worst_distance)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, Json j) {
  Json out{{"schema_version", kSchemaVersion}};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "schema_version") out[it.key()] = it.value();
  write_text(path, out.dump(2) + "\n");
}

std::string format_g17(double value) { return fmt::format("{:.17g}", value); }

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::string text = "t";
  for (std::size_t d = 0; d < trajectory.dim; ++d) text += fmt::format(",x{}", d + 1);
  text += "\n";
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    text += format_g17(trajectory.times[k]);
    for (double x : trajectory.state(k)) text += "," + format_g17(x);
    text += "\n";
  }
  write_text(path, text);
}

void write_sweep_csv(const std::filesystem::path& path, const SweepReport& report) {
  std::string text = "x1_0,x2_0,class,final_norm\n";
  for (const auto& cell : report.cells) {
    std::string cls = to_string(cell.classification.kind);
    if (cell.classification.kind == Classification::Kind::converged_to_equilibrium)
      cls += fmt::format("({})", cell.classification.equilibrium);
    text += fmt::format("{},{},{},{}\n", format_g17(cell.x0[0]), format_g17(cell.x0.size() > 1 ? cell.x0[1] : 0.0),
                        cls, format_g17(cell.final_norm));
  }
  write_text(path, text);
}

}  // namespace smallgain
