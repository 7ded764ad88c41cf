#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "npbrake/npbrake.h"

namespace {

const std::string kData = NPBRAKE_DATA_DIR;

std::string Path(const std::string& rel) { return kData + "/" + rel; }

struct Loaded {
  npb_road* road = nullptr;
  npb_vehicle* vehicle = nullptr;
  npb_scenario* scenario = nullptr;

  explicit Loaded(const std::string& scenario_file) {
    EXPECT_EQ(npb_scenario_from_file(Path("scenarios/" + scenario_file).c_str(), &scenario), NPB_OK)
        << npb_last_error();
    EXPECT_EQ(npb_road_from_file(npb_scenario_road_path(scenario), &road), NPB_OK);
    EXPECT_EQ(npb_vehicle_from_file(npb_scenario_vehicle_path(scenario), &vehicle), NPB_OK);
  }
  ~Loaded() {
    npb_scenario_free(scenario);
    npb_vehicle_free(vehicle);
    npb_road_free(road);
  }
};

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_GT(std::string(npb_version()).size(), 0u);
  EXPECT_STREQ(npb_status_string(NPB_OK), "ok");
  EXPECT_NE(std::string(npb_status_string(NPB_ERR_INFEASIBLE)), "ok");
}

TEST(CApi, NullArguments) {
  npb_road* road = nullptr;
  EXPECT_EQ(npb_road_from_file(nullptr, &road), NPB_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(npb_road_from_json("{}", nullptr), NPB_ERR_INVALID_ARGUMENT);
  EXPECT_GT(std::string(npb_last_error()).size(), 0u);
  double s = 0, w = 0;
  EXPECT_EQ(npb_road_extent(nullptr, &s, &w), NPB_ERR_INVALID_ARGUMENT);
  npb_road_free(nullptr);
  npb_profile_free(nullptr);
  npb_run_free(nullptr);
}

TEST(CApi, ErrorCodes) {
  npb_road* road = nullptr;
  EXPECT_EQ(npb_road_from_file("/nonexistent/road.json", &road), NPB_ERR_IO);
  EXPECT_EQ(npb_road_from_json("{\"type\": \"plane\"", &road), NPB_ERR_CONFIG);
  EXPECT_EQ(road, nullptr);
  ASSERT_EQ(npb_road_from_json(R"({"type": "plane", "length": 50, "half_width": 2})", &road), NPB_OK);
  double s = 0, w = 0;
  EXPECT_EQ(npb_road_extent(road, &s, &w), NPB_OK);
  EXPECT_EQ(s, 50.0);
  EXPECT_EQ(w, 2.0);
  npb_surface_check chk{};
  EXPECT_EQ(npb_check_surface(road, 0, 5, &chk), NPB_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(npb_check_surface(road, 10, 5, &chk), NPB_OK);
  EXPECT_LT(chk.max_error, 1e-6);
  npb_road_free(road);
}

TEST(CApi, PlanShippedScenario) {
  Loaded in("plane_plan.json");
  npb_profile* prof = nullptr;
  ASSERT_EQ(npb_plan(in.road, in.vehicle, in.scenario, nullptr, &prof), NPB_OK) << npb_last_error();
  EXPECT_STREQ(npb_profile_status(prof), "optimal");
  ASSERT_EQ(npb_profile_num_stages(prof), 10u);
  npb_stage_result st{};
  ASSERT_EQ(npb_profile_stage(prof, 0, &st), NPB_OK);
  EXPECT_EQ(st.v2, 400.0);
  EXPECT_EQ(npb_profile_stage(prof, 10, &st), NPB_ERR_INVALID_ARGUMENT);
  EXPECT_LT(npb_profile_continuity_residual(prof), 1e-6);
  EXPECT_EQ(npb_profile_first_infeasible_stage(prof), -1);
  char* json = nullptr;
  ASSERT_EQ(npb_profile_summary_json(prof, &json), NPB_OK);
  const auto j = nlohmann::json::parse(json);
  EXPECT_EQ(j["status"], "optimal");
  npb_string_free(json);
  npb_profile_free(prof);
}

TEST(CApi, InfeasiblePlanKeepsStage) {
  Loaded in("crest_fast.json");
  npb_profile* prof = nullptr;
  EXPECT_EQ(npb_plan(in.road, in.vehicle, in.scenario, nullptr, &prof), NPB_ERR_INFEASIBLE);
  ASSERT_NE(prof, nullptr);
  EXPECT_GE(npb_profile_first_infeasible_stage(prof), 0);
  EXPECT_EQ(npb_profile_num_stages(prof), 0u);
  npb_profile_free(prof);
}

TEST(CApi, OptionsChangeTheModel) {
  Loaded in("banked_arc_plan.json");
  npb_options opt;
  npb_options_default(&opt);
  EXPECT_EQ(opt.paper_literal, 0);
  npb_profile* a = nullptr;
  npb_profile* b = nullptr;
  ASSERT_EQ(npb_plan(in.road, in.vehicle, in.scenario, &opt, &a), NPB_OK);
  opt.paper_literal = 1;
  ASSERT_EQ(npb_plan(in.road, in.vehicle, in.scenario, &opt, &b), NPB_OK);
  npb_stage_result sa{}, sb{};
  npb_profile_stage(a, 1, &sa);
  npb_profile_stage(b, 1, &sb);
  EXPECT_NE(sa.v2, sb.v2);
  npb_profile_free(a);
  npb_profile_free(b);
  opt.theta_rate_variant = 7;
  EXPECT_EQ(npb_plan(in.road, in.vehicle, in.scenario, &opt, &a), NPB_ERR_INVALID_ARGUMENT);
}

TEST(CApi, SimulateWritesLog) {
  Loaded in("plane_sim.json");
  npb_run* run = nullptr;
  ASSERT_EQ(npb_simulate(in.road, in.vehicle, in.scenario, "delayed_driver", nullptr, &run), NPB_OK)
      << npb_last_error();
  npb_run_summary sum{};
  ASSERT_EQ(npb_run_summary_get(run, &sum), NPB_OK);
  EXPECT_EQ(sum.completed, 1);
  ASSERT_GT(npb_run_num_records(run), 10u);
  npb_log_record rec{};
  ASSERT_EQ(npb_run_record(run, 0, &rec), NPB_OK);
  EXPECT_EQ(rec.t, 0.0);
  const std::string out = ::testing::TempDir() + "npb_run.csv";
  ASSERT_EQ(npb_run_write_csv(run, out.c_str(), 0), NPB_OK);
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header.rfind("t,s,y", 0), 0u) << header;
  EXPECT_EQ(npb_simulate(in.road, in.vehicle, in.scenario, "warp", nullptr, &run), NPB_ERR_CONFIG);
  npb_run_free(run);
}

TEST(CApi, SolveConicJson) {
  const char* prog = R"({"c": [1], "A": {"rows": 0, "cols": 1, "entries": []}, "b": [],
    "G": {"rows": 2, "cols": 1, "entries": [[0, 0, -1], [1, 0, 1]]}, "h": [-1, 0],
    "cones": {"l": 2, "q": []}})";
  char* out = nullptr;
  EXPECT_EQ(npb_solve_conic_json(prog, &out), NPB_ERR_INFEASIBLE);
  ASSERT_NE(out, nullptr);
  EXPECT_EQ(nlohmann::json::parse(out)["status"], "infeasible");
  npb_string_free(out);
  EXPECT_EQ(npb_solve_conic_json("[1, 2", &out), NPB_ERR_CONFIG);
}

// ---- command line ------------------------------------------------------------

int RunCli(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string(NPBRAKE_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string text;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = pclose(pipe);
  if (output) *output = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, PlanAndExitCodes) {
  const std::string out = ::testing::TempDir() + "npb_plan.csv";
  EXPECT_EQ(RunCli("plan --scenario " + Path("scenarios/plane_plan.json") + " --out " + out), 0);
  std::ifstream f(out);
  std::string first;
  std::getline(f, first);
  EXPECT_EQ(first.rfind("# npbrake", 0), 0u) << first;
  std::string text;
  EXPECT_EQ(RunCli("plan --scenario " + Path("scenarios/crest_fast.json"), &text), 2);
  EXPECT_NE(text.find("stage"), std::string::npos) << text;
}

TEST(Cli, ConfigErrorsExitOne) {
  const std::string bad = ::testing::TempDir() + "npb_bad.json";
  std::ofstream(bad) << "{\n  \"v0\": 3,\n  \"N\" 4\n}\n";
  std::string text;
  EXPECT_EQ(RunCli("plan --scenario " + bad, &text), 1);
  EXPECT_NE(text.find(":3:"), std::string::npos) << text;
  EXPECT_EQ(RunCli("plan --scenario /nonexistent.json"), 1);
  EXPECT_NE(RunCli("frobnicate"), 0);
}

TEST(Cli, CheckSurface) {
  EXPECT_EQ(RunCli("check-surface --road " + Path("roads/hill_s_curve.json") + " --ns 40 --ny 5"), 0);
}

TEST(Cli, SimulateOutcome) {
  std::string text;
  EXPECT_EQ(RunCli("simulate --scenario " + Path("scenarios/plane_sim.json") + " --mode none", &text),
            0);
  EXPECT_NE(text.find("\"completed\""), std::string::npos) << text;
}

}  // namespace
