#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "npbrake/conic_solver.hpp"
#include "npbrake/force_model.hpp"
#include "npbrake/road_surface.hpp"
#include "npbrake/simulator.hpp"

namespace npb {

using Json = nlohmann::json;

// Reads a whole file; throws Io.
std::string ReadTextFile(const std::string& path);

// Parses JSON text; syntax errors throw Config with line and column.
Json ParseJsonText(const std::string& text, const std::string& source);

RoadSurface ParseRoad(const Json& j);
RoadSurface LoadRoad(const std::string& path);

struct VehicleConfig {
  VehicleParams params;
  TireParams tire;
  ActuatorParams actuator;
};

VehicleConfig ParseVehicle(const Json& j);
VehicleConfig LoadVehicle(const std::string& path);

enum class Expectation { kAny, kComplete, kDepart };

struct ScenarioConfig {
  // Planning.
  double v0 = 0.0;
  int num_stages = 50;
  double s_start = 0.0;
  double s_end = 0.0;
  double lane_offset = 0.0;
  std::vector<double> brake_profile{0.0};
  // Simulation; tire and actuator come from the vehicle.
  SimMode mode = SimMode::kNone;
  SimSettings sim;
  std::optional<Expectation> expect;
  // Optional file references, resolved against the scenario's directory.
  std::string road;
  std::string vehicle;

  // Outcome a run in `mode` is expected to have.
  Expectation Expected() const;
};

ScenarioConfig ParseScenario(const Json& j, const std::string& base_dir = "");
ScenarioConfig LoadScenario(const std::string& path);

// Simulation settings for a scenario run with the vehicle's tire/actuator.
SimSettings MakeSimSettings(const ScenarioConfig& scenario, const VehicleConfig& vehicle,
                            const ModelOptions& options);

// Conic program interchange format:
// {"c": [...], "A": {"rows": m, "cols": n, "entries": [[i, j, v], ...]},
//  "b": [...], "G": {...}, "h": [...], "cones": {"l": k, "q": [3, ...]},
//  "objective_offset": 0, "settings": {"max_iter": 100, "tol": 1e-8}}
struct ConicRequest {
  ConicProgram program;
  SolverSettings settings;
};
ConicRequest ParseConicRequest(const Json& j);
Json ConicSolutionToJson(const ConicSolution& solution);

}  // namespace npb
