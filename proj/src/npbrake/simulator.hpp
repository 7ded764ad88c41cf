#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "npbrake/ebd.hpp"
#include "npbrake/force_model.hpp"
#include "npbrake/road_surface.hpp"
#include "npbrake/speed_planner.hpp"

namespace npb {

// Pacejka magic formula, pure slip peak d * mu * N.
struct TireParams {
  double b = 10.0;
  double c = 1.9;
  double d = 1.0;
  double e = 0.97;
};

struct DriverParams {
  double k_p = 0.1;            // rad/m
  double k_i = 0.02;           // rad/(m s)
  double k_theta = 1.0;        // rad/rad
  double integral_limit = 5.0; // m s
  double max_angle = 0.6;      // rad
  double max_rate = 1.0;       // rad/s
};

struct ActuatorParams {
  double lag = 0.05;    // s, first-order brake lag
  double cap = 8000.0;  // N per wheel
};

enum class SimMode { kNone, kDelayedDriver, kSafetySystem, kSafetySystemPlanar };

const char* ToString(SimMode mode);
// Throws Config on unknown names.
SimMode ParseSimMode(const std::string& name);

struct SimSettings {
  double v0 = 20.0;
  double s_start = 0.0;
  double s_end = 100.0;
  double lane_offset = 0.0;
  double t_max = 30.0;
  double dt = 1e-3;
  double control_dt = 1e-2;
  double replan_dt = 0.1;
  double horizon = 100.0;  // m
  int horizon_stages = 30;
  double driver_delay = 1.0;
  double driver_brake = 0.0;  // N, total brake request after the delay
  double intervention_threshold = 1.0;
  double stop_speed = 0.5;
  // Adherence the safety planner assumes, as a fraction of the tire's.
  double plan_mu_scale = 1.0;
  TireParams tire;
  DriverParams driver;
  ActuatorParams actuator;
  ModelOptions model;
  SolverSettings solver;
};

struct SimState {
  double s = 0.0;
  double y = 0.0;
  double theta_s = 0.0;
  double v = 0.0;
  double beta = 0.0;
  double omega3 = 0.0;
  double delta = 0.0;  // road-wheel steering angle
  double t = 0.0;
  std::array<double, 4> brake{};  // applied brake force per wheel (fr, fl, rr, rl)
  // Carried from the previous step for the quasi-static load transfer.
  double vdot = 0.0;
  double kappa_s = 0.0;
  double kappa_beta = 0.0;
};

struct Controls {
  double steer = 0.0;
  std::array<double, 4> brake{};
};

// Instantaneous physics at a state with its brakes and steering held.
struct SimEvaluation {
  std::array<double, 4> normals{};
  std::array<double, 4> fx{};  // body axes
  std::array<double, 4> fy{};
  Eigen::Vector3d tire_force = Eigen::Vector3d::Zero();
  Eigen::Vector3d aero = Eigen::Vector3d::Zero();
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  double yaw_moment = 0.0;
  double friction_util = 0.0;
  double s_dot = 0.0;
  double y_dot = 0.0;
  double theta_dot = 0.0;
  double v_dot = 0.0;
  double beta_dot = 0.0;
  double omega3_dot = 0.0;
};

class Simulator {
 public:
  Simulator(const RoadSurface& road, const VehicleParams& vehicle, const SimSettings& settings);

  SimEvaluation Evaluate(const SimState& state) const;
  // dt in (0, 0.01]. Throws OffRoad when the state starts off the road and
  // NumericalBlowup when the result is not finite.
  SimState Step(const SimState& state, const Controls& controls, double dt) const;
  // a_proper = (tire + aero) / m in body axes; gravity excluded.
  ImuSample SynthesizeImu(const SimState& state) const;
  ImuSample SynthesizeImu(const SimEvaluation& eval) const;

  // Lane-following state at (s, lane_offset) with speed v.
  SimState InitialState(double s, double y, double v) const;

  const RoadSurface& road() const { return road_; }
  const VehicleParams& vehicle() const { return vehicle_; }
  const SimSettings& settings() const { return settings_; }

 private:
  const RoadSurface& road_;
  VehicleParams vehicle_;
  SimSettings settings_;
};

enum LogFlag : int {
  kFlagIntervention = 1,
  kFlagPlanInfeasible = 2,
  kFlagFallbackBraking = 4,
  kFlagBrakeShortfall = 8,
};

struct LogRecord {
  double t = 0.0;
  double s = 0.0;
  double y = 0.0;
  double theta_s = 0.0;
  double v = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  std::array<double, 4> normals{};
  std::array<double, 4> normals_est{};
  std::array<double, 4> brake{};
  double friction_util = 0.0;
  Eigen::Vector3d a_proper = Eigen::Vector3d::Zero();
  double margin = 0.0;
  double driver_brake = 0.0;
  int flags = 0;
};

struct RunSummary {
  bool completed = false;
  std::string reason;  // "s_end", "stopped", "off_road", "t_max"
  double max_abs_y = 0.0;
  double max_friction_util = 0.0;
  double min_wheel_load = 0.0;
  double t_end = 0.0;
  double s_end = 0.0;
  double v_end = 0.0;
  int plans = 0;
  int infeasible_plans = 0;
};

struct RunResult {
  std::vector<LogRecord> log;
  RunSummary summary;
};

// Closed-loop run; one log row per control step.
RunResult RunScenario(const RoadSurface& road, const VehicleParams& vehicle,
                      const SimSettings& settings, SimMode mode);

}  // namespace npb
