#include "npbrake/kinematics.hpp"

#include <cmath>

#include "npbrake/errors.hpp"

namespace npb {
namespace {

constexpr double kSingularDet = 1e-12;

Eigen::Matrix2d OffsetMetricInverse(const FundamentalForms& forms, double n) {
  const Eigen::Matrix2d m = forms.first - n * forms.second;
  const double det = m.determinant();
  if (std::abs(det) < kSingularDet) {
    Throw(ErrorCode::kSingularOffset, "I - n II is singular at this pose");
  }
  Eigen::Matrix2d inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

}  // namespace

Eigen::Matrix2d CurvatureOperator(const SurfaceFrame& frame,
                                  const FundamentalForms& forms, double n) {
  return frame.j.inverse() * forms.second * OffsetMetricInverse(forms, n) * frame.j;
}

Eigen::Vector2d CoordinateRates(const SurfaceFrame& frame,
                                const FundamentalForms& forms, double n,
                                double v, double beta) {
  const Eigen::Vector2d vb(v * std::cos(beta), v * std::sin(beta));
  return OffsetMetricInverse(forms, n) * frame.j * vb;
}

Eigen::Vector2d TangentAngularVelocity(const SurfaceFrame& frame,
                                       const FundamentalForms& forms, double n,
                                       double v, double beta) {
  const Eigen::Vector2d vb(v * std::cos(beta), v * std::sin(beta));
  const Eigen::Vector2d rotated = CurvatureOperator(frame, forms, n) * vb;
  return {rotated.y(), -rotated.x()};
}

ThetaRateTerms ComputeThetaRateTerms(const SurfaceJet& jet,
                                     ThetaRateVariant variant) {
  const double metric = jet.x_s.dot(jet.x_s);
  const Eigen::Vector3d& lateral =
      variant == ThetaRateVariant::kSymmetric ? jet.x_sy : jet.x_yy;
  return {jet.x_ss.cross(jet.x_s).dot(jet.e_n) / metric,
          lateral.cross(jet.x_s).dot(jet.e_n) / metric};
}

double Omega3(double kappa_s, double v, const ThetaRateTerms& terms,
              const Eigen::Vector2d& coordinate_rates) {
  return kappa_s * v - terms.a_s * coordinate_rates.x() -
         terms.a_y * coordinate_rates.y();
}

AffinePair BodyAccels(const VelocityParam& velocity) {
  const double c = std::cos(velocity.beta), s = std::sin(velocity.beta);
  return {AffineScalar{0.0, -velocity.kappa_beta * s, c},
          AffineScalar{0.0, velocity.kappa_beta * c, s}};
}

AffinePair AngularAccels(const SurfaceFrame& frame, const FundamentalForms& forms,
                         double n, const AffinePair& body_accels) {
  const Eigen::Matrix2d op = CurvatureOperator(frame, forms, n);
  const auto& a1 = body_accels.first;
  const auto& a2 = body_accels.second;
  // Row i of op applied to (a1, a2) coefficient-wise.
  const AffineScalar minus_w2dot = op(0, 0) * a1 + op(0, 1) * a2;
  const AffineScalar w1dot = op(1, 0) * a1 + op(1, 1) * a2;
  return {w1dot, -minus_w2dot};
}

BodyRates ComputeBodyRates(const SurfaceJet& jet, const FundamentalForms& forms,
                           const SurfaceFrame& frame, double n,
                           const VelocityParam& velocity,
                           ThetaRateVariant variant) {
  BodyRates rates;
  const Eigen::Vector2d coord = CoordinateRates(frame, forms, n, velocity.v, velocity.beta);
  const Eigen::Vector2d omega =
      TangentAngularVelocity(frame, forms, n, velocity.v, velocity.beta);
  rates.s_dot = coord.x();
  rates.y_dot = coord.y();
  rates.omega1 = omega.x();
  rates.omega2 = omega.y();
  rates.omega3 = Omega3(velocity.kappa_s, velocity.v,
                        ComputeThetaRateTerms(jet, variant), coord);
  const AffinePair linear = BodyAccels(velocity);
  rates.v1_dot = linear.first;
  rates.v2_dot = linear.second;
  const AffinePair accel = AngularAccels(frame, forms, n, linear);
  rates.omega1_dot = accel.first;
  rates.omega2_dot = accel.second;
  return rates;
}

}  // namespace npb
