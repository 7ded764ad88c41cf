#include "npbrake/force_model.hpp"

#include <cmath>

#include "npbrake/errors.hpp"

namespace npb {

void VehicleParams::Validate() const {
  const struct {
    const char* name;
    double value;
  } positive[] = {{"mass", mass},           {"inertia1", inertia1},
                  {"inertia2", inertia2},   {"inertia3", inertia3},
                  {"cg_height", cg_height}, {"l_front", l_front},
                  {"l_rear", l_rear},       {"t_front", t_front},
                  {"t_rear", t_rear},       {"gravity", gravity}};
  for (const auto& p : positive) {
    if (!(p.value > 0.0) || !std::isfinite(p.value)) {
      Throw(ErrorCode::kInvalidArgument, std::string(p.name) + " must be positive");
    }
  }
  if (!(mu > 0.0 && mu <= 2.0)) {
    Throw(ErrorCode::kInvalidArgument, "mu must lie in (0, 2]");
  }
  if (!(k_drag >= 0.0) || !(k_lift >= 0.0) || !std::isfinite(k_drag) ||
      !std::isfinite(k_lift)) {
    Throw(ErrorCode::kInvalidArgument, "aero coefficients must be finite and >= 0");
  }
}

Eigen::Vector3d GravityBody(const SurfaceFrame& frame, const VehicleParams& params) {
  return params.mass * frame.r_gb.transpose() * Eigen::Vector3d(0.0, 0.0, -params.gravity);
}

Vec3Affine BodyForces(const BodyRates& r, double beta, const VehicleParams& params) {
  const double m = params.mass;
  const double v1 = std::cos(beta), v2 = std::sin(beta);
  // Products of two v-linear rates land in the v^2 coefficient.
  return {m * (r.v1_dot - AffineScalar::SpeedSquared(r.omega3 * v2)),
          m * (r.v2_dot + AffineScalar::SpeedSquared(r.omega3 * v1)),
          AffineScalar::SpeedSquared(m * (r.omega1 * v2 - r.omega2 * v1))};
}

AffineScalar NetNormalForceQuadratic(const SurfaceFrame& frame,
                                     const FundamentalForms& forms, double n,
                                     double beta, double theta_s,
                                     const VehicleParams& params) {
  const Eigen::Matrix2d metric = forms.first - n * forms.second;
  if (std::abs(metric.determinant()) < 1e-12) {
    Throw(ErrorCode::kSingularOffset, "I - n II is singular at this pose");
  }
  const Eigen::Vector2d u(std::cos(beta + theta_s), std::sin(beta + theta_s));
  const double k = u.dot(frame.q.inverse() * forms.second * metric.inverse() * frame.q * u);
  return AffineScalar::SpeedSquared(params.mass * k);
}

Vec2Affine BodyMoments(const BodyRates& r, const VehicleParams& params) {
  return {params.inertia1 * r.omega1_dot +
              AffineScalar::SpeedSquared((params.inertia3 - params.inertia2) *
                                         r.omega2 * r.omega3),
          params.inertia2 * r.omega2_dot +
              AffineScalar::SpeedSquared((params.inertia1 - params.inertia3) *
                                         r.omega3 * r.omega1)};
}

Vec3Affine AeroForces(const VehicleParams& params) {
  return {AffineScalar::SpeedSquared(-params.k_drag), AffineScalar{},
          AffineScalar::SpeedSquared(-params.k_lift)};
}

Vec3Affine TireForces(const Vec3Affine& body_force, const Eigen::Vector3d& gravity,
                      const Vec3Affine& aero) {
  Vec3Affine out;
  for (int i = 0; i < 3; ++i) {
    out[i] = body_force[i] - AffineScalar::Constant(gravity[i]) - aero[i];
  }
  return out;
}

ForceSet ComputeForceSet(const BodyRates& unit_rates, double beta,
                         const SurfaceFrame& frame, const VehicleParams& params) {
  ForceSet f;
  f.body_force = BodyForces(unit_rates, beta, params);
  f.body_moment = BodyMoments(unit_rates, params);
  f.gravity = GravityBody(frame, params);
  f.aero = AeroForces(params);
  f.tire_force = TireForces(f.body_force, f.gravity, f.aero);
  f.normal_moment = NormalForceMoments(f.body_moment, f.tire_force, params);
  return f;
}

}  // namespace npb
