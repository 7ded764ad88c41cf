#pragma once

#include <array>

#include <Eigen/Dense>

#include "npbrake/affine.hpp"
#include "npbrake/kinematics.hpp"
#include "npbrake/road_surface.hpp"

namespace npb {

// Single-body vehicle. Defaults are configuration values for a mid-size
// sedan. t_front and t_rear are half track widths.
struct VehicleParams {
  double mass = 1500.0;         // kg
  double inertia1 = 600.0;      // kg m^2, roll
  double inertia2 = 2200.0;     // kg m^2, pitch
  double inertia3 = 2500.0;     // kg m^2, yaw
  double cg_height = 0.55;      // m
  double l_front = 1.2;         // m, CoM to front axle
  double l_rear = 1.4;          // m, CoM to rear axle
  double t_front = 0.75;        // m
  double t_rear = 0.75;         // m
  double mu = 0.9;
  double gravity = 9.81;        // m/s^2
  double k_drag = 0.0;          // kg/m, drag force k_drag v^2
  double k_lift = 0.0;          // kg/m, downforce k_lift v^2

  double wheelbase() const { return l_front + l_rear; }
  // Throws InvalidArgument on out-of-range values.
  void Validate() const;
};

using Vec3Affine = std::array<AffineScalar, 3>;
using Vec2Affine = std::array<AffineScalar, 2>;

struct ForceSet {
  Vec3Affine body_force;     // F^b, net force from Newton-Euler
  Vec2Affine body_moment;    // K^b, roll and pitch
  Vec3Affine aero;           // F^aero
  Vec3Affine tire_force;     // F^t
  Vec2Affine normal_moment;  // K^N
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();  // F^g, body axes
};

template <class T>
struct WheelLoads {
  T front{};
  T rear{};
  T delta{};
  T fr{};
  T fl{};
  T rr{};
  T rl{};

  std::array<T, 4> wheels() const { return {fr, fl, rr, rl}; }
};

using WheelNormals = WheelLoads<AffineScalar>;

// m R_gb^T (0, 0, -g).
Eigen::Vector3d GravityBody(const SurfaceFrame& frame, const VehicleParams& params);

// Forces and moments below take `unit_rates`: ComputeBodyRates evaluated at
// v = 1, so every rate is the coefficient of v.
Vec3Affine BodyForces(const BodyRates& unit_rates, double beta,
                      const VehicleParams& params);

// Same F^b_3 through the closed quadratic form
// m v^2 u^T Q^-1 II (I - n II)^-1 Q u with u = (cos(beta + theta_s), sin(.)).
AffineScalar NetNormalForceQuadratic(const SurfaceFrame& frame,
                                     const FundamentalForms& forms, double n,
                                     double beta, double theta_s,
                                     const VehicleParams& params);

Vec2Affine BodyMoments(const BodyRates& unit_rates, const VehicleParams& params);

Vec3Affine AeroForces(const VehicleParams& params);

// F^t = F^b - F^g - F^aero.
Vec3Affine TireForces(const Vec3Affine& body_force, const Eigen::Vector3d& gravity,
                      const Vec3Affine& aero);

template <class T>
std::array<T, 2> NormalForceMoments(const std::array<T, 2>& body_moment,
                                    const std::array<T, 3>& tire_force,
                                    const VehicleParams& params) {
  const double h = params.cg_height;
  return {body_moment[0] - h * tire_force[1], body_moment[1] + h * tire_force[0]};
}

// Quasi-static load transfer. With paper_literal the axle loads are not
// halved and the four wheels sum to twice the net normal force.
template <class T>
WheelLoads<T> DistributeLoad(const std::array<T, 2>& normal_moment, const T& f_t3,
                             const VehicleParams& params, bool paper_literal = false) {
  const double axle_scale = (paper_literal ? 1.0 : 0.5) / params.wheelbase();
  const double tf = params.t_front, tr = params.t_rear;
  WheelLoads<T> out;
  out.front = axle_scale * (params.l_rear * f_t3 - normal_moment[1]);
  out.rear = axle_scale * (params.l_front * f_t3 + normal_moment[1]);
  out.delta = (1.0 / (2.0 * (tf * tf + tr * tr))) * normal_moment[0];
  out.fr = out.front - tf * out.delta;
  out.fl = out.front + tf * out.delta;
  out.rr = out.rear - tr * out.delta;
  out.rl = out.rear + tr * out.delta;
  return out;
}

ForceSet ComputeForceSet(const BodyRates& unit_rates, double beta,
                         const SurfaceFrame& frame, const VehicleParams& params);

}  // namespace npb
