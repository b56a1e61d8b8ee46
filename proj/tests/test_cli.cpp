#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifndef SMALLGAIN_CLI_PATH
#error "SMALLGAIN_CLI_PATH must name the CLI binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("smallgain_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(SMALLGAIN_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path write_config(const json& j) {
    const auto p = dir_ / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
  }

  std::string err() const { return slurp(dir_ / "stderr.txt"); }
  json read_json(const std::string& name) const { return json::parse(slurp(dir_ / "out" / name)); }
  std::string out() const { return (dir_ / "out").string(); }

  fs::path dir_;
};

json small_simulation() {
  return json{{"simulate",
               {{"grid", {{"lo", {0, 0}}, {"hi", {60, 60}}, {"steps", {4, 4}}}},
                {"t_end", 2.0},
                {"dt", 1e-3},
                {"record_stride", 100},
                {"initial_conditions", {{1.0, 1.0}}}}}};
}

}  // namespace

TEST_F(Cli, GainsCsvHeader) {
  ASSERT_EQ(run("gains --out " + out()), 0) << err();
  const auto csv = slurp(dir_ / "out" / "gains.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,g12,g21,comp,id");
  EXPECT_EQ(slurp(dir_ / "out" / "gains.svg").rfind("<svg", 0), 0u);
}

TEST_F(Cli, DeltaOutsideUnitIntervalRejected) {
  EXPECT_EQ(run("gains --delta 0 --out " + out()), 2);
  EXPECT_NE(err().find("delta"), std::string::npos);
  EXPECT_EQ(run("gains --delta 1 --out " + out()), 2);
}

TEST_F(Cli, GainsForSingleBranch) {
  ASSERT_EQ(run("gains --n 0 --out " + out()), 0) << err();
  const auto csv = slurp(dir_ / "out" / "gains.csv");
  EXPECT_GT(std::count(csv.begin(), csv.end(), '\n'), 100);
}

TEST_F(Cli, SgcReportsFourIncreasingIntervals) {
  ASSERT_EQ(run("sgc --out " + out()), 0) << err();
  const auto j = read_json("sgc.json");
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("increasing_intervals").size(), 4u);
  EXPECT_EQ(j.at("intervals").size(), 2u);
  EXPECT_TRUE(j.at("intervals").back().at("right_open").get<bool>());
}

TEST_F(Cli, SgcIsByteIdenticalOnRerun) {
  ASSERT_EQ(run("sgc --out " + out()), 0);
  const auto first = slurp(dir_ / "out" / "sgc.json");
  ASSERT_EQ(run("sgc --out " + out()), 0);
  EXPECT_EQ(first, slurp(dir_ / "out" / "sgc.json"));
}

TEST_F(Cli, DensityAtOriginBox) {
  const auto cfg = write_config(json{{"density",
                                      {{"regions",
                                        {{{"name", "origin"},
                                          {"box", {{"lo", {-0.1, -0.1}}, {"hi", {0.1, 0.1}}, {"steps", {40, 40}}, {"open", true}}},
                                          {"expect", "fail"}}}}}}});
  ASSERT_EQ(run("density --config " + cfg.string() + " --out " + out()), 0) << err();
  const auto j = read_json("density_origin.json");
  EXPECT_EQ(j.at("schema_version"), 1);
  const double min_div = j.at("min_divergence").get<double>();
  EXPECT_LT(min_div, -90.0);
  EXPECT_GT(min_div, -140.0);
  EXPECT_EQ(j.at("violation_fraction").get<double>(), 1.0);
}

TEST_F(Cli, DensityBadDkListsRegions) {
  const auto cfg = write_config(json{{"density", {{"regions", {{{"name", "bad"}, {"kind", "dk"}, {"k", 7}}}}}}});
  EXPECT_EQ(run("density --config " + cfg.string() + " --out " + out()), 2);
  EXPECT_NE(err().find("detected 2 small-gain interval"), std::string::npos) << err();
  EXPECT_FALSE(fs::exists(dir_ / "out" / "density_bad.json"));
}

TEST_F(Cli, DensityFailedExpectationExitsNonzero) {
  const auto cfg = write_config(json{{"density",
                                      {{"regions",
                                        {{{"name", "origin"},
                                          {"box", {{"lo", {-0.1, -0.1}}, {"hi", {0.1, 0.1}}, {"steps", {4, 4}}, {"open", true}}},
                                          {"expect", "pass"}}}}}}});
  EXPECT_EQ(run("density --config " + cfg.string() + " --out " + out()), 1);
}

TEST_F(Cli, SimulateWritesReports) {
  const auto cfg = write_config(small_simulation());
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + out()), 0) << err();
  const auto j = read_json("sweep.json");
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("cells"), 16);
  const auto csv = slurp(dir_ / "out" / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1_0,x2_0,class,final_norm");
  const auto traj = slurp(dir_ / "out" / "trajectory_0.csv");
  EXPECT_EQ(traj.substr(0, traj.find('\n')), "t,x1,x2");
}

TEST_F(Cli, FiguresWritesSixFiles) {
  const auto cfg = write_config(json{{"figures", {{"t_end", 1.0}, {"autonomous_steps", 3}, {"forced_steps", 3}}}});
  ASSERT_EQ(run("figures --config " + cfg.string() + " --out " + out()), 0) << err();
  for (const char* stem : {"fig1_gh", "fig2_autonomous", "fig3_forced"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / (std::string(stem) + ".svg"))) << stem;
    EXPECT_TRUE(fs::exists(dir_ / "out" / (std::string(stem) + ".csv"))) << stem;
  }
  EXPECT_NE(slurp(dir_ / "out" / "fig3_forced.svg").find("<ellipse"), std::string::npos);
}

TEST_F(Cli, UnwritableOutputFails) {
  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_EQ(run("gains --out " + (dir_ / "blocker" / "sub").string()), 3);
  EXPECT_NE(err().find("cannot"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, CheckAllSummary) {
  json cfg = small_simulation();
  cfg["iss"] = {{"grid", {{"lo", {-60, -60}}, {"hi", {60, 60}}, {"steps", {41, 41}}}}};
  cfg["figures"] = {{"t_end", 1.0}, {"autonomous_steps", 2}, {"forced_steps", 2}};
  cfg["density"] = {{"regions",
                     {{{"name", "origin"},
                       {"box", {{"lo", {-0.1, -0.1}}, {"hi", {0.1, 0.1}}, {"steps", {8, 8}}, {"open", true}}},
                       {"expect", "fail"}},
                      {{"name", "band"},
                       {"kind", "constant_band"},
                       {"k", 1},
                       {"steps", 11},
                       {"margin", 0.01},
                       {"gate", "componentwise"},
                       {"gamma", "example"},
                       {"u", {3, 4}},
                       {"expect", "pass"}}}}};
  const auto path = write_config(cfg);
  ASSERT_EQ(run("check-all --threads 2 --config " + path.string() + " --out " + out()), 0) << slurp(dir_ / "stdout.txt");
  const auto j = read_json("summary.json");
  EXPECT_TRUE(j.at("passed").get<bool>());
  for (const char* name : {"sgc.json", "iss.json", "density_origin.json", "density_band.json", "sweep.json"})
    EXPECT_EQ(read_json(name).at("schema_version"), 1) << name;
}

TEST_F(Cli, QuickConfigPasses) {
  const auto cfg = fs::path(SMALLGAIN_SOURCE_DIR) / "configs" / "quick.json";
  ASSERT_EQ(run("check-all --config " + cfg.string() + " --out " + out()), 0) << slurp(dir_ / "stdout.txt");
  EXPECT_TRUE(read_json("summary.json").at("passed").get<bool>());
  EXPECT_TRUE(fs::exists(dir_ / "out" / "density_d2.json"));
}
