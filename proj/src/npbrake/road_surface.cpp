#include "npbrake/road_surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "npbrake/errors.hpp"

namespace npb {
namespace {

// Second-order Taylor number in one variable: value, first and second
// derivative with respect to s.
struct Dual2 {
  double v = 0.0;
  double d = 0.0;
  double dd = 0.0;
};

Dual2 operator*(const Dual2& a, const Dual2& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
Dual2 operator-(const Dual2& a, const Dual2& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Dual2 operator-(const Dual2& a) { return {-a.v, -a.d, -a.dd}; }

Dual2 Sin(const Dual2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {s, c * a.d, -s * a.d * a.d + c * a.dd};
}
Dual2 Cos(const Dual2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {c, -s * a.d, -c * a.d * a.d - s * a.dd};
}

struct DualVec {
  Dual2 x, y, z;
  Eigen::Vector3d Value() const { return {x.v, y.v, z.v}; }
  Eigen::Vector3d D1() const { return {x.d, y.d, z.d}; }
  Eigen::Vector3d D2() const { return {x.dd, y.dd, z.dd}; }
};

DualVec operator*(const Dual2& a, const DualVec& u) { return {a * u.x, a * u.y, a * u.z}; }
DualVec operator-(const DualVec& a, const DualVec& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

Dual2 FromSample(double value, const CubicSpline::Sample& derivative_source,
                 bool is_integral) {
  // For heading the spline holds the derivative (curvature) of the value.
  if (is_integral) return {value, derivative_source.value, derivative_source.d1};
  return {derivative_source.value, derivative_source.d1, derivative_source.d2};
}

using Gauss8 = boost::math::quadrature::gauss<double, 8>;

constexpr double kDegenerateNorm = 1e-9;
constexpr double kDomainSlack = 1e-9;

}  // namespace

const char* ToString(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::kPlane: return "plane";
    case SurfaceKind::kBankedArc: return "banked_arc";
    case SurfaceKind::kCrest: return "crest";
    case SurfaceKind::kRibbon: return "ribbon";
  }
  return "unknown";
}

RoadSurface::RoadSurface(SurfaceKind kind, CubicSpline kappa, CubicSpline bank,
                         CubicSpline grade, double s_max, double half_width)
    : kind_(kind),
      kappa_(std::move(kappa)),
      bank_(std::move(bank)),
      grade_(std::move(grade)),
      s_max_(s_max),
      half_width_(half_width) {
  if (!(s_max_ > 0.0) || !std::isfinite(s_max_)) {
    Throw(ErrorCode::kInvalidArgument, "road length must be positive");
  }
  if (!(half_width_ > 0.0) || !std::isfinite(half_width_)) {
    Throw(ErrorCode::kInvalidArgument, "half width must be positive");
  }
  const int cells = std::max(1, static_cast<int>(std::ceil(s_max_)));
  node_spacing_ = s_max_ / cells;
  nodes_.reserve(cells + 1);
  nodes_.push_back(Eigen::Vector3d::Zero());
  for (int i = 0; i < cells; ++i) {
    const double a = i * node_spacing_;
    const double b = a + node_spacing_;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    const auto& xs = Gauss8::abscissa();
    const auto& ws = Gauss8::weights();
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sum += ws[k] * (Tangent(mid - half * xs[k]) + Tangent(mid + half * xs[k]));
    }
    nodes_.push_back(nodes_.back() + half * sum);
  }
}

RoadSurface RoadSurface::Plane(double s_max, double half_width) {
  return RoadSurface(SurfaceKind::kPlane, CubicSpline::Constant(0.0, 0.0, s_max),
                     CubicSpline::Constant(0.0, 0.0, s_max),
                     CubicSpline::Constant(0.0, 0.0, s_max), s_max, half_width);
}

RoadSurface RoadSurface::BankedArc(double radius, double bank_angle,
                                   double arc_angle, double half_width) {
  if (!(radius > 0.0)) Throw(ErrorCode::kInvalidArgument, "radius must be positive");
  if (!(arc_angle > 0.0)) Throw(ErrorCode::kInvalidArgument, "arc angle must be positive");
  if (!(std::abs(bank_angle) < 0.5 * M_PI)) {
    Throw(ErrorCode::kInvalidArgument, "bank angle must be within (-pi/2, pi/2)");
  }
  if (half_width * std::cos(bank_angle) >= radius) {
    Throw(ErrorCode::kInvalidArgument, "half width reaches the arc center");
  }
  const double s_max = radius * arc_angle;
  return RoadSurface(SurfaceKind::kBankedArc,
                     CubicSpline::Constant(1.0 / radius, 0.0, s_max),
                     CubicSpline::Constant(bank_angle, 0.0, s_max),
                     CubicSpline::Constant(0.0, 0.0, s_max), s_max, half_width);
}

RoadSurface RoadSurface::Crest(double vertical_radius, double s_max,
                               double half_width) {
  if (!(vertical_radius > 0.0)) {
    Throw(ErrorCode::kInvalidArgument, "vertical radius must be positive");
  }
  if (s_max / vertical_radius >= 0.5 * M_PI) {
    Throw(ErrorCode::kInvalidArgument, "crest would exceed a vertical grade");
  }
  return RoadSurface(SurfaceKind::kCrest, CubicSpline::Constant(0.0, 0.0, s_max),
                     CubicSpline::Constant(0.0, 0.0, s_max),
                     CubicSpline::Linear(0.0, -1.0 / vertical_radius, 0.0, s_max),
                     s_max, half_width);
}

RoadSurface RoadSurface::Ribbon(const RibbonProfiles& p, double s_max,
                                double half_width) {
  const std::size_t n = p.knots_s.size();
  if (p.kappa_c.size() != n || p.bank.size() != n || p.grade.size() != n) {
    Throw(ErrorCode::kInvalidArgument,
          "ribbon profiles must have one value per knot");
  }
  if (n < 2 || p.knots_s.front() > 0.0 || p.knots_s.back() < s_max) {
    Throw(ErrorCode::kInvalidArgument, "ribbon knots must cover [0, s_max]");
  }
  for (double phi : p.bank) {
    if (!(std::abs(phi) < 0.5 * M_PI)) {
      Throw(ErrorCode::kInvalidArgument, "bank angle must be within (-pi/2, pi/2)");
    }
  }
  return RoadSurface(SurfaceKind::kRibbon, CubicSpline(p.knots_s, p.kappa_c),
                     CubicSpline(p.knots_s, p.bank), CubicSpline(p.knots_s, p.grade),
                     s_max, half_width);
}

bool RoadSurface::InDomain(double s, double y) const {
  return s >= -kDomainSlack && s <= s_max_ + kDomainSlack &&
         std::abs(y) <= half_width_ + kDomainSlack;
}

Eigen::Vector3d RoadSurface::Tangent(double s) const {
  const double psi = kappa_.Integral(s);
  const double gamma = grade_(s);
  return {std::cos(gamma) * std::cos(psi), std::cos(gamma) * std::sin(psi),
          std::sin(gamma)};
}

Eigen::Vector3d RoadSurface::Centerline(double s) const {
  const double cell = std::clamp(std::floor(s / node_spacing_), 0.0,
                                 static_cast<double>(nodes_.size() - 1));
  const std::size_t i = static_cast<std::size_t>(cell);
  const double a = i * node_spacing_;
  const double half = 0.5 * (s - a), mid = 0.5 * (s + a);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  const auto& xs = Gauss8::abscissa();
  const auto& ws = Gauss8::weights();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sum += ws[k] * (Tangent(mid - half * xs[k]) + Tangent(mid + half * xs[k]));
  }
  return nodes_[i] + half * sum;
}

Eigen::Vector3d RoadSurface::Position(double s, double y) const {
  return EvalJetUnchecked(s, y).x;
}

SurfaceJet RoadSurface::EvalJet(double s, double y) const {
  if (!InDomain(s, y)) {
    std::ostringstream os;
    os << "(s, y) = (" << s << ", " << y << ") outside [0, " << s_max_
       << "] x [-" << half_width_ << ", " << half_width_ << "]";
    Throw(ErrorCode::kOutOfDomain, os.str());
  }
  SurfaceJet jet = EvalJetUnchecked(s, y);
  if (!jet.valid) {
    std::ostringstream os;
    os << "|x_s x x_y| below " << kDegenerateNorm << " at (" << s << ", " << y << ")";
    Throw(ErrorCode::kDegenerateSurface, os.str());
  }
  return jet;
}

SurfaceJet RoadSurface::EvalJetUnchecked(double s, double y) const {
  const Dual2 psi = FromSample(kappa_.Integral(s), kappa_.Evaluate(s), true);
  const Dual2 gamma = FromSample(0.0, grade_.Evaluate(s), false);
  const Dual2 phi = FromSample(0.0, bank_.Evaluate(s), false);

  const Dual2 cpsi = Cos(psi), spsi = Sin(psi);
  const Dual2 cgam = Cos(gamma), sgam = Sin(gamma);
  const Dual2 cphi = Cos(phi), sphi = Sin(phi);

  const DualVec tangent{cgam * cpsi, cgam * spsi, sgam};
  const DualVec left{-spsi, cpsi, Dual2{}};
  const DualVec up{-(sgam * cpsi), -(sgam * spsi), cgam};
  const DualVec lateral = cphi * left - sphi * up;

  SurfaceJet jet;
  jet.x = Centerline(s) + y * lateral.Value();
  jet.x_s = tangent.Value() + y * lateral.D1();
  jet.x_y = lateral.Value();
  jet.x_ss = tangent.D1() + y * lateral.D2();
  jet.x_sy = lateral.D1();
  jet.x_yy = Eigen::Vector3d::Zero();

  const Eigen::Vector3d cross = jet.x_s.cross(jet.x_y);
  const double norm = cross.norm();
  jet.valid = norm >= kDegenerateNorm;
  if (jet.valid) jet.e_n = cross / norm;
  return jet;
}

FundamentalForms ComputeFundamentalForms(const SurfaceJet& jet,
                                         bool planar_model) {
  if (!jet.valid) Throw(ErrorCode::kDegenerateSurface, "invalid surface jet");
  FundamentalForms forms;
  forms.first << jet.x_s.dot(jet.x_s), jet.x_s.dot(jet.x_y),
      jet.x_y.dot(jet.x_s), jet.x_y.dot(jet.x_y);
  if (!planar_model) {
    const double off = jet.x_sy.dot(jet.e_n);
    forms.second << jet.x_ss.dot(jet.e_n), off, off, jet.x_yy.dot(jet.e_n);
  }
  return forms;
}

SurfaceFrame ComputeSurfaceFrame(const SurfaceJet& jet, double theta_s) {
  if (!jet.valid) Throw(ErrorCode::kDegenerateSurface, "invalid surface jet");
  const double ns = jet.x_s.norm();
  const double ny = jet.x_y.norm();
  const double cosine = jet.x_s.dot(jet.x_y) / (ns * ny);
  if (std::abs(cosine) >= 1.0 - 1e-12) {
    Throw(ErrorCode::kDegenerateSurface, "surface tangents are parallel");
  }
  SurfaceFrame frame;
  frame.theta_p = -std::asin(cosine);
  frame.q << ns, 0.0, -std::sin(frame.theta_p) * ny, std::cos(frame.theta_p) * ny;
  const double c = std::cos(theta_s), s = std::sin(theta_s);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  frame.j = frame.q * rot;

  const Eigen::Vector3d e_s = jet.x_s / ns;
  const Eigen::Vector3d e_perp = jet.e_n.cross(e_s);
  frame.r_gb.col(0) = c * e_s + s * e_perp;
  frame.r_gb.col(1) = -s * e_s + c * e_perp;
  frame.r_gb.col(2) = jet.e_n;
  return frame;
}

double LaneArclength(const RoadSurface& surface, double y, double s0, double s1) {
  if (!(s0 < s1)) Throw(ErrorCode::kInvalidArgument, "lane_arclength needs s0 < s1");
  if (!surface.InDomain(s0, y) || !surface.InDomain(s1, y)) {
    Throw(ErrorCode::kOutOfDomain, "lane_arclength span leaves the road");
  }
  auto speed = [&](double s) { return surface.EvalJetUnchecked(s, y).x_s.norm(); };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      speed, s0, s1, 15, 1e-11, &error);
}

namespace {

double RelativeError(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact,
                     double floor) {
  return (approx - exact).norm() / std::max(exact.norm(), floor);
}

Eigen::Vector4d Flatten(const Eigen::Matrix2d& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

}  // namespace

SurfaceCheckReport CheckSurface(const RoadSurface& surface, int ns, int ny,
                                double step) {
  if (ns < 1 || ny < 1) Throw(ErrorCode::kInvalidArgument, "grid must be at least 1x1");
  SurfaceCheckReport report;
  // Second partials are compared with a floor so that vanishing curvature
  // does not turn round-off into a large relative error.
  constexpr double kFloor = 1e-3;
  const double w = surface.half_width() - 2.0 * step;
  const double span = surface.s_max() - 4.0 * step;
  for (int i = 0; i < ns; ++i) {
    const double s = 2.0 * step + span * (i + 0.5) / ns;
    for (int k = 0; k < ny; ++k) {
      const double y = -w + 2.0 * w * (k + 0.5) / ny;
      const SurfaceJet jet = surface.EvalJet(s, y);
      const SurfaceJet sp = surface.EvalJet(s + step, y), sm = surface.EvalJet(s - step, y);
      const SurfaceJet yp = surface.EvalJet(s, y + step), ym = surface.EvalJet(s, y - step);

      SurfaceJet fd = jet;
      fd.x_s = (sp.x - sm.x) / (2.0 * step);
      fd.x_y = (yp.x - ym.x) / (2.0 * step);
      fd.x_ss = (sp.x_s - sm.x_s) / (2.0 * step);
      fd.x_sy = (yp.x_s - ym.x_s) / (2.0 * step);
      fd.x_yy = (yp.x_y - ym.x_y) / (2.0 * step);
      fd.e_n = fd.x_s.cross(fd.x_y).normalized();

      const FundamentalForms exact = ComputeFundamentalForms(jet);
      const FundamentalForms approx = ComputeFundamentalForms(fd);

      const std::pair<const char*, double> errors[] = {
          {"x_s", RelativeError(fd.x_s, jet.x_s, 1.0)},
          {"x_y", RelativeError(fd.x_y, jet.x_y, 1.0)},
          {"x_ss", RelativeError(fd.x_ss, jet.x_ss, kFloor)},
          {"x_sy", RelativeError(fd.x_sy, jet.x_sy, kFloor)},
          {"x_yy", RelativeError(fd.x_yy, jet.x_yy, kFloor)},
          {"e_n", RelativeError(fd.e_n, jet.e_n, 1.0)},
          {"I", RelativeError(Flatten(approx.first), Flatten(exact.first), 1.0)},
          {"II", RelativeError(Flatten(approx.second), Flatten(exact.second), kFloor)},
      };
      for (const auto& [name, err] : errors) {
        if (report.worst_quantity.empty() || err > report.max_error) {
          report.max_error = err;
          report.worst_s = s;
          report.worst_y = y;
          report.worst_quantity = name;
        }
      }
      ++report.points;
    }
  }
  return report;
}

}  // namespace npb
