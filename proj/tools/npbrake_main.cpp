// npbrake command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "npbrake/npbrake.h"
#include "bench.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kInfeasible = 2, kSolver = 3, kScenario = 4 };

int ExitFor(npb_status status) {
  switch (status) {
    case NPB_OK: return kOk;
    case NPB_ERR_INFEASIBLE: return kInfeasible;
    case NPB_ERR_SOLVER:
    case NPB_ERR_INTERNAL: return kSolver;
    case NPB_ERR_SCENARIO: return kScenario;
    default: return kConfig;
  }
}

int Report(npb_status status) {
  std::fprintf(stderr, "npbrake: %s\n", npb_last_error());
  return ExitFor(status);
}

struct Common {
  bool paper_literal = false;
  bool no_meta = false;
  bool planar = false;
  std::string theta_rate = "symmetric";

  void Register(CLI::App* app) {
    app->add_flag("--paper-literal", paper_literal,
                  "use the printed load-transfer and velocity-continuity forms");
    app->add_flag("--planar", planar, "plan as if the road were flat");
    app->add_flag("--no-meta", no_meta, "omit the timestamp header line from outputs");
    app->add_option("--theta-rate", theta_rate, "heading-rate second partial")
        ->check(CLI::IsMember({"symmetric", "printed"}));
  }

  npb_options Options() const {
    npb_options o;
    npb_options_default(&o);
    o.paper_literal = paper_literal ? 1 : 0;
    o.theta_rate_variant = theta_rate == "printed" ? 1 : 0;
    o.planar_model = planar ? 1 : 0;
    return o;
  }
};

// Owns the three inputs of plan/simulate.
struct Inputs {
  npb_road* road = nullptr;
  npb_vehicle* vehicle = nullptr;
  npb_scenario* scenario = nullptr;

  ~Inputs() {
    npb_road_free(road);
    npb_vehicle_free(vehicle);
    npb_scenario_free(scenario);
  }

  npb_status Load(const std::string& road_path, const std::string& vehicle_path,
                  const std::string& scenario_path) {
    npb_status st = npb_scenario_from_file(scenario_path.c_str(), &scenario);
    if (st != NPB_OK) return st;
    std::string rp = road_path, vp = vehicle_path;
    if (rp.empty() && npb_scenario_road_path(scenario)) rp = npb_scenario_road_path(scenario);
    if (vp.empty() && npb_scenario_vehicle_path(scenario)) vp = npb_scenario_vehicle_path(scenario);
    if (rp.empty() || vp.empty()) {
      std::fprintf(stderr, "npbrake: need --road and --vehicle (or references in the scenario)\n");
      return NPB_ERR_CONFIG;
    }
    st = npb_road_from_file(rp.c_str(), &road);
    if (st != NPB_OK) return st;
    return npb_vehicle_from_file(vp.c_str(), &vehicle);
  }
};

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  npb_string_free(s);
  return out;
}

int CheckSurface(const std::string& road_path, int ns, int ny, double tol) {
  npb_road* road = nullptr;
  npb_status st = npb_road_from_file(road_path.c_str(), &road);
  if (st != NPB_OK) return Report(st);
  npb_surface_check r{};
  st = npb_check_surface(road, ns, ny, &r);
  npb_road_free(road);
  if (st != NPB_OK) return Report(st);
  std::printf(
      "{\"max_error\": %.17g, \"worst_quantity\": \"%s\", \"worst_s\": %.17g, \"worst_y\": "
      "%.17g, \"points\": %d, \"tolerance\": %.17g, \"pass\": %s}\n",
      r.max_error, r.worst_quantity, r.worst_s, r.worst_y, r.points, tol,
      r.max_error < tol ? "true" : "false");
  return r.max_error < tol ? kOk : kScenario;
}

int Plan(const std::string& road, const std::string& vehicle, const std::string& scenario,
         const std::string& out, const Common& common) {
  Inputs in;
  npb_status st = in.Load(road, vehicle, scenario);
  if (st != NPB_OK) return Report(st);
  const npb_options opts = common.Options();
  npb_profile* profile = nullptr;
  const npb_status plan_status = npb_plan(in.road, in.vehicle, in.scenario, &opts, &profile);
  const std::string error = plan_status == NPB_OK ? "" : npb_last_error();
  if (!profile) return Report(plan_status);
  char* summary = nullptr;
  if (npb_profile_summary_json(profile, &summary) == NPB_OK) {
    std::printf("%s\n", TakeString(summary).c_str());
  }
  if (plan_status == NPB_OK && !out.empty()) {
    st = npb_profile_write_csv(profile, out.c_str(), common.no_meta ? 0 : 1);
    if (st != NPB_OK) {
      npb_profile_free(profile);
      return Report(st);
    }
  }
  npb_profile_free(profile);
  if (plan_status != NPB_OK) {
    std::fprintf(stderr, "npbrake: %s\n", error.c_str());
  }
  return ExitFor(plan_status);
}

int Simulate(const std::string& road, const std::string& vehicle, const std::string& scenario,
             const std::string& mode, const std::string& out, const Common& common) {
  Inputs in;
  npb_status st = in.Load(road, vehicle, scenario);
  if (st != NPB_OK) return Report(st);
  const npb_options opts = common.Options();
  npb_run* run = nullptr;
  st = npb_simulate(in.road, in.vehicle, in.scenario, mode.empty() ? nullptr : mode.c_str(),
                    &opts, &run);
  if (st != NPB_OK) return Report(st);
  char* summary = nullptr;
  if (npb_run_summary_json(run, &summary) == NPB_OK) {
    std::printf("%s\n", TakeString(summary).c_str());
  }
  if (!out.empty()) {
    st = npb_run_write_csv(run, out.c_str(), common.no_meta ? 0 : 1);
    if (st != NPB_OK) {
      npb_run_free(run);
      return Report(st);
    }
  }
  npb_run_summary s{};
  npb_run_summary_get(run, &s);
  npb_run_free(run);
  if (!s.expectation_met) {
    std::fprintf(stderr, "npbrake: scenario outcome '%s' differs from the expected outcome\n",
                 s.reason);
    return kScenario;
  }
  return kOk;
}

int SolveConic(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "npbrake: cannot open '%s'\n", in_path.c_str());
    return kConfig;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  char* solution = nullptr;
  const npb_status st = npb_solve_conic_json(ss.str().c_str(), &solution);
  if (!solution) return Report(st);
  const std::string text = TakeString(solution);
  if (out_path.empty() || out_path == "-") {
    std::printf("%s\n", text.c_str());
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << text << '\n';
    if (!out) {
      std::fprintf(stderr, "npbrake: cannot write '%s'\n", out_path.c_str());
      return kConfig;
    }
  }
  if (st != NPB_OK) std::fprintf(stderr, "npbrake: %s\n", npb_last_error());
  return ExitFor(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"npbrake: predictive braking on nonplanar roads"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(npb_version()));

  std::string road, vehicle, scenario, out, mode, in_path, data_dir = NPBRAKE_DATA_DIR;
  int ns = 40, ny = 9;
  double tol = 1e-6;
  Common common;

  auto* check = app.add_subcommand("check-surface", "finite-difference check of a road surface");
  check->add_option("--road", road, "road JSON")->required();
  check->add_option("--ns", ns, "samples along s")->check(CLI::PositiveNumber);
  check->add_option("--ny", ny, "samples across y")->check(CLI::PositiveNumber);
  check->add_option("--tol", tol, "relative error tolerance");

  auto* plan = app.add_subcommand("plan", "solve the safety speed-planning program");
  plan->add_option("--road", road, "road JSON");
  plan->add_option("--vehicle", vehicle, "vehicle JSON");
  plan->add_option("--scenario", scenario, "scenario JSON")->required();
  plan->add_option("--out", out, "profile CSV");
  common.Register(plan);

  auto* sim = app.add_subcommand("simulate", "closed-loop scenario run");
  sim->add_option("--road", road, "road JSON");
  sim->add_option("--vehicle", vehicle, "vehicle JSON");
  sim->add_option("--scenario", scenario, "scenario JSON")->required();
  sim->add_option("--mode", mode, "none, delayed_driver, safety_system, safety_system_planar");
  sim->add_option("--out", out, "log CSV");
  common.Register(sim);

  auto* conic = app.add_subcommand("solve-conic", "solve a conic program given as JSON");
  conic->add_option("--in", in_path, "program JSON")->required();
  conic->add_option("--out", out, "solution JSON (default stdout)");

  auto* bench = app.add_subcommand("bench", "run the acceptance scenarios and print a table");
  bench->add_option("--data-dir", data_dir, "directory holding the shipped scenario pack");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  if (*check) return CheckSurface(road, ns, ny, tol);
  if (*plan) return Plan(road, vehicle, scenario, out, common);
  if (*sim) return Simulate(road, vehicle, scenario, mode, out, common);
  if (*conic) return SolveConic(in_path, out);
  if (*bench) return npbrake_cli::RunBench(data_dir);
  return kConfig;
}
