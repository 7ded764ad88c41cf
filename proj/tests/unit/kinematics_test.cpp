#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "npbrake/errors.hpp"
#include "npbrake/kinematics.hpp"

namespace npb {
namespace {

constexpr double kPi = std::numbers::pi;

struct Pose {
  SurfaceJet jet;
  FundamentalForms forms;
  SurfaceFrame frame;
};

Pose At(const RoadSurface& r, double s, double y, double theta) {
  Pose p;
  p.jet = r.EvalJet(s, y);
  p.forms = ComputeFundamentalForms(p.jet);
  p.frame = ComputeSurfaceFrame(p.jet, theta);
  return p;
}

// Angular velocity in world axes.
Eigen::Vector3d WorldOmega(const Pose& p, const BodyRates& r) {
  return p.frame.r_gb * Eigen::Vector3d(r.omega1, r.omega2, r.omega3);
}

TEST(Kinematics, PlaneRates) {
  const RoadSurface r = RoadSurface::Plane(100, 2.5);
  const Pose p = At(r, 10, 0.5, 0.3);
  const VelocityParam vel{12.0, 0.05, 0.02, 0.0};
  const BodyRates b = ComputeBodyRates(p.jet, p.forms, p.frame, 0.55, vel);
  EXPECT_NEAR(b.s_dot, 12 * std::cos(0.35), 1e-12);
  EXPECT_NEAR(b.y_dot, 12 * std::sin(0.35), 1e-12);
  EXPECT_NEAR(b.omega1, 0.0, 1e-14);
  EXPECT_NEAR(b.omega2, 0.0, 1e-14);
  EXPECT_NEAR(b.omega3, 0.02 * 12, 1e-12);
}

TEST(Kinematics, CrestPitchRate) {
  const double R = 100, v = 15;
  const RoadSurface r = RoadSurface::Crest(R, 100, 2.5);
  const Pose p = At(r, 0, 0, 0);
  const BodyRates b = ComputeBodyRates(p.jet, p.forms, p.frame, 0.0, {v, 0, 0, 0});
  // nose drops over the apex: rotation about the left axis
  const Eigen::Vector3d w = WorldOmega(p, b);
  EXPECT_NEAR(w.x(), 0.0, 1e-12);
  EXPECT_NEAR(w.y(), v / R, 1e-12);
  EXPECT_NEAR(w.z(), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(b.omega2), v / R, 1e-12);
  EXPECT_NEAR(b.omega1, 0.0, 1e-12);
}

TEST(Kinematics, CrestOffsetScalesSpeed) {
  const double R = 100, v = 15, n = 0.55;
  const RoadSurface r = RoadSurface::Crest(R, 100, 2.5);
  const Pose p = At(r, 0, 0, 0);
  const Eigen::Vector2d rates = CoordinateRates(p.frame, p.forms, n, v, 0.0);
  // a point n above a convex crest travels on radius R + n
  EXPECT_NEAR(rates.x(), v * R / (R + n), 1e-10);
  const Eigen::Vector2d w = TangentAngularVelocity(p.frame, p.forms, n, v, 0.0);
  EXPECT_NEAR(std::abs(w.y()), v / (R + n), 1e-12);
}

TEST(Kinematics, BankedTurnAngularVelocityIsVertical) {
  const double R = 50, v = 14;
  for (double bank : {0.2, -0.29}) {
    const RoadSurface r = RoadSurface::BankedArc(R, bank, kPi, 2.5);
    const Pose p = At(r, 20, 0, 0);
    const BodyRates b = ComputeBodyRates(p.jet, p.forms, p.frame, 0.0, {v, 0, 0, 0});
    const Eigen::Vector3d w = WorldOmega(p, b);
    EXPECT_NEAR(w.x(), 0.0, 1e-10) << bank;
    EXPECT_NEAR(w.y(), 0.0, 1e-10) << bank;
    EXPECT_NEAR(w.z(), v / R, 1e-10) << bank;
  }
}

TEST(Kinematics, HeadingRateMatchesDifferences) {
  // Follow a curve with constant theta_s on a twisted ribbon and compare the
  // world rotation of the body x axis with omega x e1.
  RibbonProfiles prof;
  for (int i = 0; i <= 20; ++i) {
    const double s = 10.0 * i;
    prof.knots_s.push_back(s);
    prof.kappa_c.push_back(0.015 * std::sin(s / 35));
    prof.bank.push_back(0.12 * std::cos(s / 30));
    prof.grade.push_back(0.05 * std::sin(s / 45));
  }
  const RoadSurface r = RoadSurface::Ribbon(prof, 200, 3.0);
  const double theta = 0.2, v = 10, y0 = 0.8, s0 = 70;
  const Pose p = At(r, s0, y0, theta);
  const BodyRates b = ComputeBodyRates(p.jet, p.forms, p.frame, 0.0, {v, 0, 0, 0});
  const double h = 1e-5;
  auto e1 = [&](double t) {
    const Pose q = At(r, s0 + b.s_dot * t, y0 + b.y_dot * t, theta);
    return Eigen::Vector3d(q.frame.r_gb.col(0));
  };
  // kappa_s = 0 keeps theta_s constant, so the body frame along the path is
  // the frame at fixed theta and e1 turns exactly as omega x e1
  const Eigen::Vector3d de1 = (e1(h) - e1(-h)) / (2 * h);
  const Eigen::Vector3d pred = WorldOmega(p, b).cross(p.frame.r_gb.col(0));
  EXPECT_NEAR((pred - de1).norm(), 0.0, 1e-7) << pred.transpose() << " | " << de1.transpose();
  auto e2 = [&](double t) {
    const Pose q = At(r, s0 + b.s_dot * t, y0 + b.y_dot * t, theta);
    return Eigen::Vector3d(q.frame.r_gb.col(1));
  };
  const Eigen::Vector3d de2 = (e2(h) - e2(-h)) / (2 * h);
  EXPECT_NEAR((WorldOmega(p, b).cross(p.frame.r_gb.col(1)) - de2).norm(), 0.0, 1e-7);
}

TEST(Kinematics, BodyAccelsBicycle) {
  const AffinePair a = BodyAccels({10, 0.1, 0.0, 0.3});
  // v1 = v cos(beta), v1dot = vdot cos(beta) - v sin(beta) betadot
  EXPECT_NEAR(a.first(100, 2.0), 2.0 * std::cos(0.1) - 100 * std::sin(0.1) * 0.3, 1e-12);
  EXPECT_NEAR(a.second(100, 2.0), 2.0 * std::sin(0.1) + 100 * std::cos(0.1) * 0.3, 1e-12);
}

TEST(Kinematics, SingularOffsetThrows) {
  const RoadSurface r = RoadSurface::Crest(1.5, 2, 0.5);
  const Pose p = At(r, 0, 0, 0);
  try {
    CurvatureOperator(p.frame, p.forms, 1.0 / p.forms.second(0, 0));
    FAIL() << "expected SingularOffset";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularOffset);
  }
}

// On x = c(s) + y b(s) the lateral heading term vanishes with either second
// partial, so both variants give the same rates on every ribbon road.
TEST(Kinematics, HeadingVariantsAgreeOnRibbons) {
  RibbonProfiles prof;
  for (int i = 0; i <= 20; ++i) {
    const double s = 10.0 * i;
    prof.knots_s.push_back(s);
    prof.kappa_c.push_back(0.02 * std::cos(s / 40));
    prof.bank.push_back(0.15 * std::sin(s / 20));
    prof.grade.push_back(0.04 * std::cos(s / 50));
  }
  const RoadSurface r = RoadSurface::Ribbon(prof, 200, 3.0);
  for (double s : {15.0, 77.0, 140.0}) {
    for (double y : {-2.5, 1.0}) {
      const SurfaceJet j = r.EvalJet(s, y);
      EXPECT_GT(j.x_sy.norm(), 1e-3);
      const auto a = ComputeThetaRateTerms(j, ThetaRateVariant::kSymmetric);
      const auto b = ComputeThetaRateTerms(j, ThetaRateVariant::kPrinted);
      EXPECT_NEAR(a.a_s, b.a_s, 1e-15);
      EXPECT_NEAR(a.a_y, 0.0, 1e-12);
      EXPECT_NEAR(b.a_y, 0.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace npb
