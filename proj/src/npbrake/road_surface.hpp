#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "npbrake/spline.hpp"

namespace npb {

enum class SurfaceKind { kPlane, kBankedArc, kCrest, kRibbon };

const char* ToString(SurfaceKind kind);

// Profile data for a ribbon road. All profiles share the same knots.
//   kappa_c: horizontal centerline curvature [1/m], positive turns left
//   bank:    bank angle [rad], positive raises the right edge (y < 0),
//            i.e. the outside of a left turn
//   grade:   grade angle [rad], positive climbs
struct RibbonProfiles {
  std::vector<double> knots_s;
  std::vector<double> kappa_c;
  std::vector<double> bank;
  std::vector<double> grade;
};

// Position and exact partial derivatives of x^p at (s, y).
struct SurfaceJet {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_y = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_ss = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_sy = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_yy = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_n = Eigen::Vector3d::UnitZ();
  bool valid = false;
};

struct FundamentalForms {
  Eigen::Matrix2d first = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
};

// Relation between the surface coordinate basis and the body heading.
struct SurfaceFrame {
  double theta_p = 0.0;
  Eigen::Matrix2d q = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d j = Eigen::Matrix2d::Identity();
  // Columns are the body axes e^b_1, e^b_2, e^b_3 in world coordinates.
  Eigen::Matrix3d r_gb = Eigen::Matrix3d::Identity();
};

// Ribbon road x^p(s, y) = c(s) + y b(s): c is the arc-length parameterized
// centerline built from heading (integrated curvature) and grade, b is the
// horizontal left unit vector rotated about the centerline tangent by the
// bank angle. Immutable after construction.
class RoadSurface {
 public:
  static RoadSurface Plane(double s_max, double half_width);
  // Left-turning arc of constant radius and bank. bank_angle > 0 is the
  // stabilizing direction; off-camber is negative.
  static RoadSurface BankedArc(double radius, double bank_angle,
                               double arc_angle, double half_width);
  // Vertical circle with its apex at s = 0 (centerline z ~ -s^2 / 2R).
  static RoadSurface Crest(double vertical_radius, double s_max,
                           double half_width);
  static RoadSurface Ribbon(const RibbonProfiles& profiles, double s_max,
                            double half_width);

  SurfaceKind kind() const { return kind_; }
  double s_max() const { return s_max_; }
  double half_width() const { return half_width_; }
  bool InDomain(double s, double y) const;

  double Curvature(double s) const { return kappa_(s); }
  double Bank(double s) const { return bank_(s); }
  double Grade(double s) const { return grade_(s); }
  double Heading(double s) const { return kappa_.Integral(s); }

  Eigen::Vector3d Centerline(double s) const;
  // Position only; used by finite-difference checks.
  Eigen::Vector3d Position(double s, double y) const;

  // Analytic jet at (s, y). Throws OutOfDomain / DegenerateSurface.
  SurfaceJet EvalJet(double s, double y) const;

  // Same as EvalJet without the domain check; used by the simulator for
  // states that have already been checked against a widened domain.
  SurfaceJet EvalJetUnchecked(double s, double y) const;

 private:
  RoadSurface(SurfaceKind kind, CubicSpline kappa, CubicSpline bank,
              CubicSpline grade, double s_max, double half_width);

  Eigen::Vector3d Tangent(double s) const;

  SurfaceKind kind_;
  CubicSpline kappa_;
  CubicSpline bank_;
  CubicSpline grade_;
  double s_max_;
  double half_width_;
  double node_spacing_ = 1.0;
  std::vector<Eigen::Vector3d> nodes_;
};

// With planar_model set the second fundamental form is forced to zero,
// which is how a flat-road planner sees the same surface.
FundamentalForms ComputeFundamentalForms(const SurfaceJet& jet,
                                         bool planar_model = false);

// Q-R form of the body/surface Jacobian for heading theta_s relative to x_s.
SurfaceFrame ComputeSurfaceFrame(const SurfaceJet& jet, double theta_s);

// Arc length of the curve y = const between s0 and s1.
double LaneArclength(const RoadSurface& surface, double y, double s0,
                     double s1);

struct SurfaceCheckReport {
  double max_error = 0.0;
  double worst_s = 0.0;
  double worst_y = 0.0;
  std::string worst_quantity;
  int points = 0;
};

// Compares every analytic partial and both fundamental forms with central
// differences (first partials from positions, second partials from first
// partials) on a cell-centered ns x ny grid.
SurfaceCheckReport CheckSurface(const RoadSurface& surface, int ns, int ny,
                                double step = 1e-5);

}  // namespace npb
