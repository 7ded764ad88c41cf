#include "npbrake/ebd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npbrake/errors.hpp"

namespace npb {

Eigen::Vector3d EstimateTireForces(const ImuSample& imu, const VehicleParams& params,
                                   double speed) {
  const double v2 = speed * speed;
  const Eigen::Vector3d aero(-params.k_drag * v2, 0.0, -params.k_lift * v2);
  return params.mass * imu.a_proper - aero;
}

const Eigen::Vector3d& AngularAccelFilter::Update(const Eigen::Vector3d& omega, double dt) {
  if (!(dt > 0.0)) Throw(ErrorCode::kInvalidArgument, "filter step must be positive");
  if (!primed_) {
    primed_ = true;
    last_ = omega;
    return estimate_;
  }
  const Eigen::Vector3d raw = (omega - last_) / dt;
  last_ = omega;
  estimate_ += (dt / (tau_ + dt)) * (raw - estimate_);
  return estimate_;
}

WheelLoads<double> EstimateWheelNormals(const Eigen::Vector3d& tire_force,
                                        const Eigen::Vector3d& omega,
                                        const Eigen::Vector3d& omega_dot,
                                        const VehicleParams& params, bool paper_literal) {
  const double i1 = params.inertia1, i2 = params.inertia2, i3 = params.inertia3;
  const std::array<double, 2> body_moment{
      i1 * omega_dot[0] + (i3 - i2) * omega[1] * omega[2],
      i2 * omega_dot[1] + (i1 - i3) * omega[2] * omega[0]};
  const std::array<double, 3> ft{tire_force[0], tire_force[1], tire_force[2]};
  const auto moment = NormalForceMoments(body_moment, ft, params);
  return DistributeLoad(moment, ft[2], params, paper_literal);
}

BrakeAllocation Allocate(double target, const std::array<double, 4>& normals,
                         const std::array<double, 4>& mu, const std::array<double, 4>& caps) {
  BrakeAllocation out;
  std::array<double, 4> limit{};
  std::array<bool, 4> active{};
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(normals[i]) || !std::isfinite(mu[i]) || mu[i] < 0.0 || caps[i] < 0.0) {
      Throw(ErrorCode::kInvalidArgument, "allocation inputs must be finite and nonnegative");
    }
    out.unloaded[i] = normals[i] <= 0.0;
    limit[i] = out.unloaded[i] ? 0.0 : std::min(mu[i] * normals[i], caps[i]);
    active[i] = !out.unloaded[i];
  }
  double remaining = std::max(target, 0.0);
  if (!std::isfinite(remaining)) remaining = std::numeric_limits<double>::max();
  for (int round = 0; round < 4 && remaining > 0.0; ++round) {
    double load = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (active[i]) load += normals[i];
    }
    if (load <= 0.0) break;
    bool clipped = false;
    for (int i = 0; i < 4; ++i) {
      if (active[i] && out.force[i] + remaining * normals[i] / load >= limit[i]) clipped = true;
    }
    if (!clipped) {
      for (int i = 0; i < 4; ++i) {
        if (active[i]) out.force[i] += remaining * normals[i] / load;
      }
      remaining = 0.0;
      break;
    }
    // Clip every wheel that would exceed its limit, then redistribute.
    for (int i = 0; i < 4; ++i) {
      if (active[i] && out.force[i] + remaining * normals[i] / load >= limit[i]) {
        active[i] = false;
      }
    }
    double used = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (!active[i] && !out.unloaded[i] && !out.saturated[i]) {
        used += limit[i] - out.force[i];
        out.force[i] = limit[i];
        out.saturated[i] = true;
      }
    }
    remaining = std::max(remaining - used, 0.0);
  }
  double total = 0.0;
  for (double f : out.force) total += f;
  out.shortfall = target > 0.0 ? std::max(target - total, 0.0) : 0.0;
  for (int i = 0; i < 4; ++i) {
    if (out.unloaded[i]) out.saturated[i] = true;
  }
  return out;
}

}  // namespace npb
