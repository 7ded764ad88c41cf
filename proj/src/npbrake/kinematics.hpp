#pragma once

#include <Eigen/Dense>

#include "npbrake/affine.hpp"
#include "npbrake/road_surface.hpp"

namespace npb {

// Which second partial multiplies ydot in the heading-rate relation.
// kSymmetric uses x_sy (the rotation rate of x_s along the motion),
// kPrinted uses x_yy as in the original typeset relation.
enum class ThetaRateVariant { kSymmetric, kPrinted };

struct PoseState {
  double s = 0.0;
  double y = 0.0;
  double n = 0.0;
  double theta_s = 0.0;
};

struct VelocityParam {
  double v = 0.0;
  double beta = 0.0;
  double kappa_s = 0.0;
  double kappa_beta = 0.0;
};

struct ThetaRateTerms {
  double a_s = 0.0;
  double a_y = 0.0;
};

// Value of each rate at speed v plus angular accelerations affine in
// (v^2, vdot).
struct BodyRates {
  double s_dot = 0.0;
  double y_dot = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega3 = 0.0;
  AffineScalar v1_dot;
  AffineScalar v2_dot;
  AffineScalar omega1_dot;
  AffineScalar omega2_dot;
};

// J^-1 II (I - n II)^-1 J; maps body tangent velocity to (-w2, w1).
// Throws SingularOffset when I - n II is (numerically) singular.
Eigen::Matrix2d CurvatureOperator(const SurfaceFrame& frame,
                                  const FundamentalForms& forms, double n);

// (sdot, ydot) = (I - n II)^-1 J (v cos(beta), v sin(beta)).
Eigen::Vector2d CoordinateRates(const SurfaceFrame& frame,
                                const FundamentalForms& forms, double n,
                                double v, double beta);

// (w1, w2) from (-w2, w1) = CurvatureOperator * v^b.
Eigen::Vector2d TangentAngularVelocity(const SurfaceFrame& frame,
                                       const FundamentalForms& forms, double n,
                                       double v, double beta);

ThetaRateTerms ComputeThetaRateTerms(
    const SurfaceJet& jet, ThetaRateVariant variant = ThetaRateVariant::kSymmetric);

// w3 = kappa_s v - a_s sdot - a_y ydot.
double Omega3(double kappa_s, double v, const ThetaRateTerms& terms,
              const Eigen::Vector2d& coordinate_rates);

struct AffinePair {
  AffineScalar first;
  AffineScalar second;
};

// (v1dot, v2dot) using betadot = kappa_beta v.
AffinePair BodyAccels(const VelocityParam& velocity);

// (w1dot, w2dot) from (-w2dot, w1dot) = CurvatureOperator * (v1dot, v2dot).
AffinePair AngularAccels(const SurfaceFrame& frame, const FundamentalForms& forms,
                         double n, const AffinePair& body_accels);

BodyRates ComputeBodyRates(const SurfaceJet& jet, const FundamentalForms& forms,
                           const SurfaceFrame& frame, double n,
                           const VelocityParam& velocity,
                           ThetaRateVariant variant = ThetaRateVariant::kSymmetric);

}  // namespace npb
