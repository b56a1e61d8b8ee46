#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "smallgain/density.hpp"
#include "smallgain/grid.hpp"
#include "smallgain/iss_model.hpp"
#include "smallgain/scalar_fn.hpp"
#include "smallgain/sim.hpp"

namespace smallgain {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// Non-finite doubles become the strings "inf", "-inf", "nan".
Json number(double value);
double number_from(const Json& value);

Json to_json(const BoxGrid& grid);
/// Accepts {lo: [..], hi: [..], steps: [..], open?: bool}.
BoxGrid box_from_json(const Json& j);

Json to_json(const SgcAnalysis& analysis);
Json to_json(const Interval& interval);
Json to_json(const Region& region);
Json to_json(const IssLyapunovReport& report);
Json to_json(const DensityCheckReport& report);
Json to_json(const NeighborhoodCertificate& certificate);
Json to_json(const SweepReport& report);
Json to_json(const Theorem1Report& report);

/// Writes `j` with "schema_version" as its first key, two-space indent and a
/// trailing newline.
void write_json(const std::filesystem::path& path, Json j);

/// CSV "t,x1,x2,..." with 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
/// CSV "x1_0,x2_0,class,final_norm".
void write_sweep_csv(const std::filesystem::path& path, const SweepReport& report);

std::string format_g17(double value);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace smallgain
