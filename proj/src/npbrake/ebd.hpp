#pragma once

#include <array>

#include <Eigen/Dense>

#include "npbrake/force_model.hpp"

namespace npb {

struct ImuSample {
  Eigen::Vector3d a_proper = Eigen::Vector3d::Zero();  // body axes
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
};

// Net tire force from an accelerometer reading: m a_proper minus the modeled
// aerodynamic force at the given speed. Gravity never enters.
Eigen::Vector3d EstimateTireForces(const ImuSample& imu, const VehicleParams& params,
                                   double speed);

// Causal derivative of the angular velocity with a first-order low-pass.
class AngularAccelFilter {
 public:
  explicit AngularAccelFilter(double time_constant = 0.02) : tau_(time_constant) {}

  const Eigen::Vector3d& Update(const Eigen::Vector3d& omega, double dt);
  const Eigen::Vector3d& value() const { return estimate_; }

 private:
  double tau_;
  bool primed_ = false;
  Eigen::Vector3d last_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d estimate_ = Eigen::Vector3d::Zero();
};

WheelLoads<double> EstimateWheelNormals(const Eigen::Vector3d& tire_force,
                                        const Eigen::Vector3d& omega,
                                        const Eigen::Vector3d& omega_dot,
                                        const VehicleParams& params,
                                        bool paper_literal = false);

struct BrakeAllocation {
  std::array<double, 4> force{};  // fr, fl, rr, rl, >= 0
  std::array<bool, 4> saturated{};
  std::array<bool, 4> unloaded{};  // N <= 0, nothing allocated
  double shortfall = 0.0;
};

// Load-proportional split of a brake force target (>= 0) with clipped excess
// redistributed over the remaining wheels until nothing clips. The yaw
// moment target is zero, which the symmetric split already satisfies for
// symmetric loads. Nonpositive targets allocate nothing.
BrakeAllocation Allocate(double target, const std::array<double, 4>& normals,
                         const std::array<double, 4>& mu, const std::array<double, 4>& caps);

}  // namespace npb
