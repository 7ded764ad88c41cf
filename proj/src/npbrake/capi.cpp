#include "npbrake/npbrake.h"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>

#include "npbrake/config.hpp"
#include "npbrake/errors.hpp"
#include "npbrake/io.hpp"
#include "npbrake/version.hpp"

struct npb_road {
  npb::RoadSurface surface;
};
struct npb_vehicle {
  npb::VehicleConfig config;
};
struct npb_scenario {
  npb::ScenarioConfig config;
  std::string mode_name;
};
struct npb_profile {
  npb::SpeedProfile profile;
};
struct npb_run {
  npb::RunResult result;
  npb::SimMode mode;
  bool expectation_met;
};

namespace {

thread_local std::string g_last_error;

npb_status Fail(npb_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

npb_status FromCode(npb::ErrorCode code) {
  using npb::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return NPB_ERR_INVALID_ARGUMENT;
    case ErrorCode::kConfig: return NPB_ERR_CONFIG;
    case ErrorCode::kOutOfDomain: return NPB_ERR_DOMAIN;
    case ErrorCode::kDegenerateSurface:
    case ErrorCode::kSingularOffset: return NPB_ERR_DEGENERATE;
    case ErrorCode::kEmptyStages: return NPB_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInfeasible: return NPB_ERR_INFEASIBLE;
    case ErrorCode::kSolverFailure: return NPB_ERR_SOLVER;
    case ErrorCode::kOffRoad:
    case ErrorCode::kNumericalBlowup: return NPB_ERR_SCENARIO;
    case ErrorCode::kIo: return NPB_ERR_IO;
  }
  return NPB_ERR_INTERNAL;
}

template <class F>
npb_status Wrap(F&& f) {
  try {
    return f();
  } catch (const npb::Error& e) {
    return Fail(FromCode(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(NPB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(NPB_ERR_INTERNAL, e.what());
  }
}

npb::ModelOptions ToOptions(const npb_options* o) {
  npb::ModelOptions out;
  if (!o) return out;
  if (o->theta_rate_variant != 0 && o->theta_rate_variant != 1) {
    npb::Throw(npb::ErrorCode::kInvalidArgument, "theta_rate_variant must be 0 or 1");
  }
  out.paper_literal = o->paper_literal != 0;
  out.theta_rate_variant =
      o->theta_rate_variant ? npb::ThetaRateVariant::kPrinted : npb::ThetaRateVariant::kSymmetric;
  out.planar_model = o->planar_model != 0;
  return out;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <std::size_t N>
void CopyInto(char (&dst)[N], const std::string& src) {
  std::snprintf(dst, N, "%s", src.c_str());
}

#define NPB_REQUIRE(cond)                                                  \
  do {                                                                     \
    if (!(cond)) return Fail(NPB_ERR_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

void npb_options_default(npb_options* options) {
  if (options) *options = npb_options{0, 0, 0};
}

const char* npb_version(void) { return npb::kVersion; }

const char* npb_status_string(npb_status status) {
  switch (status) {
    case NPB_OK: return "ok";
    case NPB_ERR_CONFIG: return "config error";
    case NPB_ERR_INFEASIBLE: return "infeasible";
    case NPB_ERR_SOLVER: return "solver failure";
    case NPB_ERR_SCENARIO: return "scenario failure";
    case NPB_ERR_DOMAIN: return "out of domain";
    case NPB_ERR_DEGENERATE: return "degenerate geometry";
    case NPB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NPB_ERR_IO: return "io error";
    case NPB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* npb_last_error(void) { return g_last_error.c_str(); }

void npb_string_free(char* text) { std::free(text); }

npb_status npb_road_from_file(const char* path, npb_road** out) {
  NPB_REQUIRE(path && out);
  return Wrap([&] {
    *out = new npb_road{npb::LoadRoad(path)};
    return NPB_OK;
  });
}

npb_status npb_road_from_json(const char* json, npb_road** out) {
  NPB_REQUIRE(json && out);
  return Wrap([&] {
    *out = new npb_road{npb::ParseRoad(npb::ParseJsonText(json, "<road>"))};
    return NPB_OK;
  });
}

void npb_road_free(npb_road* road) { delete road; }

npb_status npb_road_extent(const npb_road* road, double* s_max, double* half_width) {
  NPB_REQUIRE(road);
  if (s_max) *s_max = road->surface.s_max();
  if (half_width) *half_width = road->surface.half_width();
  return NPB_OK;
}

npb_status npb_check_surface(const npb_road* road, int ns, int ny, npb_surface_check* out) {
  NPB_REQUIRE(road && out && ns > 0 && ny > 0);
  return Wrap([&] {
    const npb::SurfaceCheckReport r = npb::CheckSurface(road->surface, ns, ny);
    out->max_error = r.max_error;
    out->worst_s = r.worst_s;
    out->worst_y = r.worst_y;
    out->points = r.points;
    CopyInto(out->worst_quantity, r.worst_quantity);
    return NPB_OK;
  });
}

npb_status npb_vehicle_from_file(const char* path, npb_vehicle** out) {
  NPB_REQUIRE(path && out);
  return Wrap([&] {
    *out = new npb_vehicle{npb::LoadVehicle(path)};
    return NPB_OK;
  });
}

npb_status npb_vehicle_from_json(const char* json, npb_vehicle** out) {
  NPB_REQUIRE(json && out);
  return Wrap([&] {
    *out = new npb_vehicle{npb::ParseVehicle(npb::ParseJsonText(json, "<vehicle>"))};
    return NPB_OK;
  });
}

void npb_vehicle_free(npb_vehicle* vehicle) { delete vehicle; }

npb_status npb_scenario_from_file(const char* path, npb_scenario** out) {
  NPB_REQUIRE(path && out);
  return Wrap([&] {
    npb::ScenarioConfig sc = npb::LoadScenario(path);
    const std::string mode = npb::ToString(sc.mode);
    *out = new npb_scenario{std::move(sc), mode};
    return NPB_OK;
  });
}

npb_status npb_scenario_from_json(const char* json, const char* base_dir, npb_scenario** out) {
  NPB_REQUIRE(json && out);
  return Wrap([&] {
    npb::ScenarioConfig sc =
        npb::ParseScenario(npb::ParseJsonText(json, "<scenario>"), base_dir ? base_dir : "");
    const std::string mode = npb::ToString(sc.mode);
    *out = new npb_scenario{std::move(sc), mode};
    return NPB_OK;
  });
}

void npb_scenario_free(npb_scenario* scenario) { delete scenario; }

const char* npb_scenario_road_path(const npb_scenario* scenario) {
  if (!scenario || scenario->config.road.empty()) return nullptr;
  return scenario->config.road.c_str();
}

const char* npb_scenario_vehicle_path(const npb_scenario* scenario) {
  if (!scenario || scenario->config.vehicle.empty()) return nullptr;
  return scenario->config.vehicle.c_str();
}

const char* npb_scenario_mode(const npb_scenario* scenario) {
  return scenario ? scenario->mode_name.c_str() : nullptr;
}

npb_status npb_plan(const npb_road* road, const npb_vehicle* vehicle,
                    const npb_scenario* scenario, const npb_options* options, npb_profile** out) {
  NPB_REQUIRE(road && vehicle && scenario && out);
  *out = nullptr;
  return Wrap([&] {
    const npb::ScenarioConfig& sc = scenario->config;
    const npb::ModelOptions opts = ToOptions(options);
    const auto stages =
        npb::BuildStages(road->surface, vehicle->config.params, sc.lane_offset, sc.s_start,
                         sc.s_end, sc.num_stages, sc.brake_profile, opts);
    const npb::PlannerProgram program = npb::AssembleProgram(stages, sc.v0, opts);
    npb::SolverSettings settings;
    auto* p = new npb_profile{npb::SolveProfile(program, stages, settings,
                                                sc.sim.intervention_threshold)};
    *out = p;
    switch (p->profile.status) {
      case npb::SolveStatus::kOptimal: return NPB_OK;
      case npb::SolveStatus::kInfeasible: return Fail(NPB_ERR_INFEASIBLE, p->profile.message);
      default:
        return Fail(NPB_ERR_SOLVER, std::string("solver ended with status ") +
                                        npb::ToString(p->profile.status) +
                                        (p->profile.message.empty() ? "" : ": " + p->profile.message));
    }
  });
}

void npb_profile_free(npb_profile* profile) { delete profile; }

const char* npb_profile_status(const npb_profile* profile) {
  return profile ? npb::ToString(profile->profile.status) : nullptr;
}

size_t npb_profile_num_stages(const npb_profile* profile) {
  return profile ? profile->profile.stages.size() : 0;
}

npb_status npb_profile_stage(const npb_profile* profile, size_t k, npb_stage_result* out) {
  NPB_REQUIRE(profile && out && k < profile->profile.stages.size());
  const npb::StageResult& r = profile->profile.stages[k];
  out->k = r.k;
  out->s = r.s;
  out->l = r.l;
  out->v2 = r.v2;
  out->vdot = r.vdot;
  out->ft1 = r.tire_force[0];
  out->ft2 = r.tire_force[1];
  out->ft3 = r.tire_force[2];
  out->margin = r.margin;
  out->friction_util = r.friction_util;
  for (int i = 0; i < 4; ++i) out->normals[i] = r.normals[i];
  out->flag = r.flag ? 1 : 0;
  return NPB_OK;
}

double npb_profile_objective(const npb_profile* profile) {
  return profile ? profile->profile.objective : 0.0;
}

double npb_profile_continuity_residual(const npb_profile* profile) {
  return profile ? profile->profile.continuity_residual : 0.0;
}

int npb_profile_first_infeasible_stage(const npb_profile* profile) {
  return profile ? profile->profile.first_infeasible_stage : -1;
}

npb_status npb_profile_summary_json(const npb_profile* profile, char** out) {
  NPB_REQUIRE(profile && out);
  return Wrap([&] {
    *out = CopyString(npb::ProfileSummaryJson(profile->profile).dump());
    return NPB_OK;
  });
}

npb_status npb_profile_write_csv(const npb_profile* profile, const char* path, int include_meta) {
  NPB_REQUIRE(profile && path);
  return Wrap([&] {
    std::ostringstream ss;
    npb::WriteProfileCsv(ss, profile->profile, include_meta != 0);
    npb::WriteFile(path, ss.str());
    return NPB_OK;
  });
}

npb_status npb_simulate(const npb_road* road, const npb_vehicle* vehicle,
                        const npb_scenario* scenario, const char* mode,
                        const npb_options* options, npb_run** out) {
  NPB_REQUIRE(road && vehicle && scenario && out);
  *out = nullptr;
  return Wrap([&] {
    npb::ScenarioConfig sc = scenario->config;
    if (mode) {
      const npb::SimMode m = npb::ParseSimMode(mode);
      if (m != sc.mode) sc.expect.reset();
      sc.mode = m;
    }
    const npb::SimSettings settings =
        npb::MakeSimSettings(sc, vehicle->config, ToOptions(options));
    npb::RunResult result =
        npb::RunScenario(road->surface, vehicle->config.params, settings, sc.mode);
    bool met = true;
    switch (sc.Expected()) {
      case npb::Expectation::kComplete: met = result.summary.completed; break;
      case npb::Expectation::kDepart: met = !result.summary.completed; break;
      case npb::Expectation::kAny: break;
    }
    *out = new npb_run{std::move(result), sc.mode, met};
    return NPB_OK;
  });
}

void npb_run_free(npb_run* run) { delete run; }

npb_status npb_run_summary_get(const npb_run* run, npb_run_summary* out) {
  NPB_REQUIRE(run && out);
  const npb::RunSummary& s = run->result.summary;
  out->completed = s.completed ? 1 : 0;
  CopyInto(out->reason, s.reason);
  out->max_abs_y = s.max_abs_y;
  out->max_friction_util = s.max_friction_util;
  out->min_wheel_load = s.min_wheel_load;
  out->t_end = s.t_end;
  out->s_end = s.s_end;
  out->v_end = s.v_end;
  out->plans = s.plans;
  out->infeasible_plans = s.infeasible_plans;
  out->expectation_met = run->expectation_met ? 1 : 0;
  return NPB_OK;
}

size_t npb_run_num_records(const npb_run* run) { return run ? run->result.log.size() : 0; }

npb_status npb_run_record(const npb_run* run, size_t i, npb_log_record* out) {
  NPB_REQUIRE(run && out && i < run->result.log.size());
  const npb::LogRecord& r = run->result.log[i];
  out->t = r.t;
  out->s = r.s;
  out->y = r.y;
  out->theta_s = r.theta_s;
  out->v = r.v;
  out->beta = r.beta;
  out->delta = r.delta;
  for (int k = 0; k < 4; ++k) {
    out->normals[k] = r.normals[k];
    out->normals_est[k] = r.normals_est[k];
    out->brake[k] = r.brake[k];
  }
  out->friction_util = r.friction_util;
  for (int k = 0; k < 3; ++k) out->a_proper[k] = r.a_proper[k];
  out->margin = r.margin;
  out->driver_brake = r.driver_brake;
  out->flags = r.flags;
  return NPB_OK;
}

npb_status npb_run_summary_json(const npb_run* run, char** out) {
  NPB_REQUIRE(run && out);
  return Wrap([&] {
    nlohmann::json j = npb::RunSummaryJson(run->result.summary, run->mode);
    j["expectation_met"] = run->expectation_met;
    *out = CopyString(j.dump());
    return NPB_OK;
  });
}

npb_status npb_run_write_csv(const npb_run* run, const char* path, int include_meta) {
  NPB_REQUIRE(run && path);
  return Wrap([&] {
    std::ostringstream ss;
    npb::WriteRunCsv(ss, run->result.log, include_meta != 0);
    npb::WriteFile(path, ss.str());
    return NPB_OK;
  });
}

npb_status npb_solve_conic_json(const char* program_json, char** solution_json) {
  NPB_REQUIRE(program_json && solution_json);
  *solution_json = nullptr;
  return Wrap([&] {
    const npb::ConicRequest req =
        npb::ParseConicRequest(npb::ParseJsonText(program_json, "<program>"));
    const npb::ConicSolution sol = npb::Solve(req.program, req.settings);
    *solution_json = CopyString(npb::ConicSolutionToJson(sol).dump(2));
    switch (sol.status) {
      case npb::SolveStatus::kOptimal: return NPB_OK;
      case npb::SolveStatus::kInfeasible:
      case npb::SolveStatus::kUnbounded:
        return Fail(NPB_ERR_INFEASIBLE, std::string("program is ") + npb::ToString(sol.status));
      default:
        return Fail(NPB_ERR_SOLVER, std::string("solver ended with status ") + npb::ToString(sol.status));
    }
  });
}

}  // extern "C"
