#include "npbrake/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "npbrake/errors.hpp"

namespace npb {

const char* ToString(SimMode mode) {
  switch (mode) {
    case SimMode::kNone: return "none";
    case SimMode::kDelayedDriver: return "delayed_driver";
    case SimMode::kSafetySystem: return "safety_system";
    case SimMode::kSafetySystemPlanar: return "safety_system_planar";
  }
  return "unknown";
}

SimMode ParseSimMode(const std::string& name) {
  for (SimMode m : {SimMode::kNone, SimMode::kDelayedDriver, SimMode::kSafetySystem,
                    SimMode::kSafetySystemPlanar}) {
    if (name == ToString(m)) return m;
  }
  Throw(ErrorCode::kConfig, "unknown mode '" + name + "'");
}

namespace {

constexpr double kMinSpeed = 0.1;

double MagicFormula(const TireParams& tire, double slip) {
  const double bx = tire.b * slip;
  return tire.d * std::sin(tire.c * std::atan(bx - tire.e * (bx - std::atan(bx))));
}

struct WheelGeometry {
  double x;
  double y;
  bool steered;
};

std::array<WheelGeometry, 4> Wheels(const VehicleParams& p) {
  return {{{p.l_front, -p.t_front, true},
           {p.l_front, p.t_front, true},
           {-p.l_rear, -p.t_rear, false},
           {-p.l_rear, p.t_rear, false}}};
}

}  // namespace

Simulator::Simulator(const RoadSurface& road, const VehicleParams& vehicle,
                     const SimSettings& settings)
    : road_(road), vehicle_(vehicle), settings_(settings) {
  vehicle_.Validate();
  if (!(settings_.dt > 0.0 && settings_.dt <= 0.01)) {
    Throw(ErrorCode::kInvalidArgument, "dt must lie in (0, 0.01]");
  }
  if (!(settings_.control_dt >= settings_.dt) || !(settings_.replan_dt >= settings_.control_dt)) {
    Throw(ErrorCode::kInvalidArgument, "need dt <= control_dt <= replan_dt");
  }
}

SimEvaluation Simulator::Evaluate(const SimState& st) const {
  const VehicleParams& p = vehicle_;
  const SurfaceJet jet = road_.EvalJetUnchecked(st.s, st.y);
  if (!jet.valid) Throw(ErrorCode::kDegenerateSurface, "surface degenerates under the vehicle");
  const StageParams model =
      MakeStage(jet, p, st.s, st.y, st.theta_s, st.beta, st.kappa_s, st.kappa_beta);
  const double v = st.v, v2 = v * v;
  const double cb = std::cos(st.beta), sb = std::sin(st.beta);
  const double u1 = v * cb, u2 = v * sb;

  SimEvaluation ev;
  ev.s_dot = model.unit_rates.s_dot * v;
  ev.y_dot = model.unit_rates.y_dot * v;
  ev.omega = {model.unit_rates.omega1 * v, model.unit_rates.omega2 * v, st.omega3};
  ev.gravity = model.forces.gravity;
  ev.aero = {-p.k_drag * v2, 0.0, -p.k_lift * v2};
  const ThetaRateTerms terms = ComputeThetaRateTerms(jet);
  ev.theta_dot = st.omega3 + terms.a_s * ev.s_dot + terms.a_y * ev.y_dot;

  const auto wheels = Wheels(p);
  const auto loads_affine = model.normals.wheels();
  const double cd = std::cos(st.delta), sd = std::sin(st.delta);

  auto tire_pass = [&](double vdot) {
    ev.tire_force.setZero();
    ev.yaw_moment = 0.0;
    double grip = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double n = std::max(loads_affine[i](v2, vdot), 0.0);
      ev.normals[i] = n;
      const double vbx = u1 - st.omega3 * wheels[i].y;
      const double vby = u2 + st.omega3 * wheels[i].x;
      const double c = wheels[i].steered ? cd : 1.0;
      const double s = wheels[i].steered ? sd : 0.0;
      const double vx = c * vbx + s * vby;
      const double vy = -s * vbx + c * vby;
      const double peak = settings_.tire.d * p.mu * n;
      double fx = 0.0, fy = 0.0;
      if (peak > 0.0) {
        fx = -std::min(st.brake[i], peak) * std::tanh(vx / 0.2);
        const double slip = std::atan2(vy, std::max(std::abs(vx), kMinSpeed));
        const double ellipse = std::sqrt(std::max(0.0, 1.0 - (fx / peak) * (fx / peak)));
        fy = -p.mu * n * MagicFormula(settings_.tire, slip) * ellipse;
      }
      ev.fx[i] = c * fx - s * fy;
      ev.fy[i] = s * fx + c * fy;
      ev.tire_force += Eigen::Vector3d(ev.fx[i], ev.fy[i], n);
      ev.yaw_moment += wheels[i].x * ev.fy[i] - wheels[i].y * ev.fx[i];
      grip += p.mu * n;
    }
    const double planar = std::hypot(ev.tire_force[0], ev.tire_force[1]);
    ev.friction_util = grip > 0.0 ? planar / grip : (planar > 0.0 ? INFINITY : 0.0);
    const double f1 = ev.tire_force[0] + ev.gravity[0] + ev.aero[0];
    const double f2 = ev.tire_force[1] + ev.gravity[1] + ev.aero[1];
    const double du1 = f1 / p.mass + st.omega3 * u2;
    const double du2 = f2 / p.mass - st.omega3 * u1;
    ev.v_dot = cb * du1 + sb * du2;
    ev.beta_dot = (cb * du2 - sb * du1) / std::max(v, kMinSpeed);
  };
  // One fixed-point pass on vdot for the load transfer.
  tire_pass(st.vdot);
  tire_pass(ev.v_dot);

  ev.omega3_dot = (ev.yaw_moment + (p.inertia1 - p.inertia2) * ev.omega[0] * ev.omega[1]) /
                  p.inertia3;
  return ev;
}

SimState Simulator::Step(const SimState& state, const Controls& controls, double dt) const {
  if (!(dt > 0.0 && dt <= 0.01)) Throw(ErrorCode::kInvalidArgument, "dt must lie in (0, 0.01]");
  if (std::abs(state.y) > road_.half_width()) {
    std::ostringstream msg;
    msg << "vehicle left the road at s=" << state.s << ", y=" << state.y;
    Throw(ErrorCode::kOffRoad, msg.str());
  }
  SimState base = state;
  base.delta = controls.steer;
  const double blend = 1.0 - std::exp(-dt / settings_.actuator.lag);
  for (int i = 0; i < 4; ++i) {
    const double cmd = std::clamp(controls.brake[i], 0.0, settings_.actuator.cap);
    base.brake[i] += (cmd - base.brake[i]) * blend;
  }

  using Vec6 = Eigen::Matrix<double, 6, 1>;
  auto pack = [](const SimState& s) {
    Vec6 x;
    x << s.s, s.y, s.theta_s, s.v, s.beta, s.omega3;
    return x;
  };
  auto unpack = [&](const Vec6& x) {
    SimState s = base;
    s.s = x[0];
    s.y = x[1];
    s.theta_s = x[2];
    s.v = x[3];
    s.beta = x[4];
    s.omega3 = x[5];
    return s;
  };
  auto deriv = [&](const SimState& s, SimEvaluation* keep) {
    const SimEvaluation ev = Evaluate(s);
    if (keep) *keep = ev;
    Vec6 d;
    d << ev.s_dot, ev.y_dot, ev.theta_dot, ev.v_dot, ev.beta_dot, ev.omega3_dot;
    return d;
  };

  SimEvaluation first;
  const Vec6 x0 = pack(base);
  const Vec6 k1 = deriv(base, &first);
  const Vec6 k2 = deriv(unpack(x0 + 0.5 * dt * k1), nullptr);
  const Vec6 k3 = deriv(unpack(x0 + 0.5 * dt * k2), nullptr);
  const Vec6 k4 = deriv(unpack(x0 + dt * k3), nullptr);
  const Vec6 x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  SimState next = unpack(x1);
  next.t = state.t + dt;
  if (!x1.allFinite() || std::abs(next.v) > 1e3 || std::abs(next.omega3) > 1e3) {
    Throw(ErrorCode::kNumericalBlowup, "simulation state diverged");
  }
  if (next.v <= 0.0) {
    next.v = 0.0;
    next.beta = 0.0;
    next.omega3 = 0.0;
  }
  next.vdot = first.v_dot;
  const double vref = std::max(state.v, kMinSpeed);
  next.kappa_s = (first.theta_dot) / vref;
  next.kappa_beta = first.beta_dot / vref;
  return next;
}

ImuSample Simulator::SynthesizeImu(const SimEvaluation& ev) const {
  ImuSample imu;
  imu.a_proper = (ev.tire_force + ev.aero) / vehicle_.mass;
  imu.omega = ev.omega;
  return imu;
}

ImuSample Simulator::SynthesizeImu(const SimState& state) const {
  return SynthesizeImu(Evaluate(state));
}

SimState Simulator::InitialState(double s, double y, double v) const {
  SimState st;
  st.s = s;
  st.y = y;
  st.v = v;
  const SurfaceJet jet = road_.EvalJet(s, y);
  const FundamentalForms forms = ComputeFundamentalForms(jet);
  const SurfaceFrame frame = ComputeSurfaceFrame(jet, 0.0);
  const Eigen::Vector2d coord = CoordinateRates(frame, forms, vehicle_.cg_height, v, 0.0);
  st.omega3 = Omega3(0.0, v, ComputeThetaRateTerms(jet), coord);
  return st;
}

namespace {

// Planned F^t_1 interpolated at s.
double PlannedForce(const SpeedProfile& profile, double s) {
  const auto& st = profile.stages;
  if (s <= st.front().s) return st.front().tire_force[0];
  for (std::size_t k = 0; k + 1 < st.size(); ++k) {
    if (s <= st[k + 1].s) {
      const double w = (s - st[k].s) / (st[k + 1].s - st[k].s);
      return (1.0 - w) * st[k].tire_force[0] + w * st[k + 1].tire_force[0];
    }
  }
  return st.back().tire_force[0];
}

}  // namespace

RunResult RunScenario(const RoadSurface& road, const VehicleParams& vehicle,
                      const SimSettings& settings, SimMode mode) {
  const Simulator sim(road, vehicle, settings);
  if (!(settings.s_end > settings.s_start) || settings.s_end > road.s_max() + 1e-9) {
    Throw(ErrorCode::kInvalidArgument, "scenario span must lie inside the road");
  }
  const bool safety = mode == SimMode::kSafetySystem || mode == SimMode::kSafetySystemPlanar;
  ModelOptions plan_options = settings.model;
  if (mode == SimMode::kSafetySystemPlanar) plan_options.planar_model = true;
  VehicleParams plan_vehicle = vehicle;
  plan_vehicle.mu *= settings.plan_mu_scale;

  const int steps_per_control = std::max(1, static_cast<int>(std::lround(settings.control_dt / settings.dt)));
  const int controls_per_plan =
      std::max(1, static_cast<int>(std::lround(settings.replan_dt / settings.control_dt)));
  const double control_dt = steps_per_control * settings.dt;

  RunResult result;
  RunSummary& sum = result.summary;
  sum.min_wheel_load = std::numeric_limits<double>::infinity();
  SimState state = sim.InitialState(settings.s_start, settings.lane_offset, settings.v0);
  AngularAccelFilter filter;
  double integral = 0.0;
  std::optional<SpeedProfile> plan;
  bool plan_failed = false;
  const std::array<double, 4> mu{vehicle.mu, vehicle.mu, vehicle.mu, vehicle.mu};
  const double cap = settings.actuator.cap;
  const std::array<double, 4> caps{cap, cap, cap, cap};
  const DriverParams& drv = settings.driver;

  for (long tick = 0;; ++tick) {
    const SimEvaluation ev = sim.Evaluate(state);
    const ImuSample imu = sim.SynthesizeImu(ev);
    const Eigen::Vector3d omega_dot = filter.Update(imu.omega, control_dt);
    const Eigen::Vector3d ft_est = EstimateTireForces(imu, vehicle, state.v);
    const WheelLoads<double> est =
        EstimateWheelNormals(ft_est, imu.omega, omega_dot, vehicle, settings.model.paper_literal);

    // Steering.
    const double err = state.y - settings.lane_offset;
    integral = std::clamp(integral + err * control_dt, -drv.integral_limit, drv.integral_limit);
    double steer_cmd = -(drv.k_p * err + drv.k_i * integral + drv.k_theta * state.theta_s);
    steer_cmd = std::clamp(steer_cmd, -drv.max_angle, drv.max_angle);
    const double max_change = drv.max_rate * control_dt;
    const double steer = state.delta + std::clamp(steer_cmd - state.delta, -max_change, max_change);

    // Brakes.
    const double request =
        (mode != SimMode::kNone && state.t + 1e-12 >= settings.driver_delay) ? settings.driver_brake : 0.0;
    LogRecord rec;
    double target = mode == SimMode::kNone ? 0.0 : request;
    if (safety) {
      if (tick % controls_per_plan == 0) {
        const double horizon_end = std::min(state.s + settings.horizon, road.s_max());
        plan.reset();
        plan_failed = false;
        if (horizon_end - state.s > 1.0 && state.v > settings.stop_speed) {
          try {
            const auto stages =
                BuildStages(road, plan_vehicle, settings.lane_offset, state.s, horizon_end,
                            std::max(settings.horizon_stages, 2), {-request}, plan_options);
            const PlannerProgram program = AssembleProgram(stages, state.v, plan_options);
            SpeedProfile profile =
                SolveProfile(program, stages, settings.solver, settings.intervention_threshold);
            ++sum.plans;
            if (profile.status == SolveStatus::kOptimal) {
              plan = std::move(profile);
            } else {
              plan_failed = true;
              ++sum.infeasible_plans;
            }
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kOutOfDomain) throw;
          }
        }
      }
      if (plan) {
        const double ft1 = PlannedForce(*plan, state.s);
        rec.margin = ft1 + request;
        target = std::max(-ft1, 0.0);
        if (std::abs(rec.margin) > settings.intervention_threshold) rec.flags |= kFlagIntervention;
      } else if (plan_failed) {
        target = std::numeric_limits<double>::infinity();
        rec.flags |= kFlagPlanInfeasible | kFlagFallbackBraking;
      }
    }
    const BrakeAllocation alloc = Allocate(target, est.wheels(), mu, caps);
    if (alloc.shortfall > 1.0 && std::isfinite(target)) rec.flags |= kFlagBrakeShortfall;

    rec.t = state.t;
    rec.s = state.s;
    rec.y = state.y;
    rec.theta_s = state.theta_s;
    rec.v = state.v;
    rec.beta = state.beta;
    rec.delta = state.delta;
    rec.normals = ev.normals;
    rec.normals_est = est.wheels();
    rec.brake = state.brake;
    rec.friction_util = ev.friction_util;
    rec.a_proper = imu.a_proper;
    rec.driver_brake = request;
    result.log.push_back(rec);
    sum.max_abs_y = std::max(sum.max_abs_y, std::abs(state.y - settings.lane_offset));
    sum.max_friction_util = std::max(sum.max_friction_util, ev.friction_util);
    for (double n : ev.normals) sum.min_wheel_load = std::min(sum.min_wheel_load, n);

    // Termination.
    std::string reason;
    if (std::abs(state.y) > road.half_width()) {
      reason = "off_road";
    } else if (state.s >= settings.s_end) {
      reason = "s_end";
    } else if (state.v < settings.stop_speed) {
      reason = "stopped";
    } else if (state.t >= settings.t_max - 1e-12) {
      reason = "t_max";
    }
    if (!reason.empty()) {
      sum.reason = reason;
      sum.completed = reason == "s_end" || reason == "stopped";
      break;
    }

    const Controls controls{steer, alloc.force};
    for (int i = 0; i < steps_per_control; ++i) {
      state = sim.Step(state, controls, settings.dt);
      if (std::abs(state.y) > road.half_width() || state.s >= settings.s_end) break;
    }
  }
  sum.t_end = state.t;
  sum.s_end = state.s;
  sum.v_end = state.v;
  return result;
}

}  // namespace npb
