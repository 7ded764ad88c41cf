#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "npbrake/config.hpp"
#include "npbrake/simulator.hpp"
#include "npbrake/speed_planner.hpp"
#include "oracles.hpp"

namespace npb::acceptance {

namespace {

// Pinned tolerances and budgets.
constexpr double kGeometryTol = 1e-6;
constexpr double kGeometrySeconds = 5.0;
constexpr int kIdentityPoses = 500;
constexpr double kIdentityTol = 1e-10;
constexpr double kIdentitySeconds = 5.0;
constexpr double kClosedFormTol = 0.005;
constexpr double kClosedFormSeconds = 30.0;
constexpr double kDpObjectiveTol = 0.01;
constexpr double kDpSpeedTol = 0.02;
constexpr double kDpSeconds = 120.0;
constexpr double kCertificateTol = 1e-7;
constexpr int kReferenceInstances = 20;
constexpr double kReferenceTol = 1e-4;
constexpr double kScenarioSeconds = 10.0;
constexpr double kContinuityTol = 1e-6;

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// Every planner program solved during the run, for criteria 5 and 7.
struct PlanCase {
  std::string name;
  PlannerProgram program;
  std::vector<StageParams> stages;
  SpeedProfile profile;
};

struct Context {
  std::string data_dir;
  VehicleParams vehicle;
  std::vector<PlanCase> cases;

  std::string Road(const std::string& name) const { return data_dir + "/roads/" + name + ".json"; }
  std::string Scenario(const std::string& name) const {
    return data_dir + "/scenarios/" + name + ".json";
  }

  SpeedProfile Plan(const std::string& name, const std::vector<StageParams>& stages, double v0,
                    const ModelOptions& options = {}) {
    PlanCase c;
    c.name = name;
    c.program = AssembleProgram(stages, v0, options);
    c.stages = stages;
    c.profile = SolveProfile(c.program, stages);
    cases.push_back(c);
    return cases.back().profile;
  }
};

// ---- 1 ----------------------------------------------------------------------

CriterionResult Geometry(Context& ctx) {
  CriterionResult r{1, "geometry finite differences", true, 0.0, ""};
  const auto t0 = Clock::now();
  std::ostringstream d;
  double worst = 0.0;
  for (const char* name : {"plane", "crest", "banked_arc", "offcamber_uturn", "hill_s_curve"}) {
    const RoadSurface road = LoadRoad(ctx.Road(name));
    const oracle::FdReport rep = oracle::FiniteDifferenceSurface(road, 40, 9);
    worst = std::max(worst, rep.max_rel_error);
    if (!(rep.max_rel_error < kGeometryTol)) {
      r.pass = false;
      d << name << " " << rep.worst << " err " << rep.max_rel_error << " at s=" << rep.worst_s
        << " y=" << rep.worst_y << "; ";
    }
  }
  r.seconds = Since(t0);
  if (r.seconds >= kGeometrySeconds) r.pass = false;
  d << "5 roads x 360 points, max rel err " << Fmt("%.2e", worst) << " (tol 1e-6), "
    << Fmt("%.2f", r.seconds) << " s (limit 5 s)";
  r.detail = d.str();
  return r;
}

// ---- 2 ----------------------------------------------------------------------

double CoefErr(const AffineScalar& a, const AffineScalar& b) {
  auto one = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
  return std::max({one(a.c0, b.c0), one(a.c_v2, b.c_v2), one(a.c_vd, b.c_vd)});
}

CriterionResult Identities(Context& ctx) {
  CriterionResult r{2, "kinematic and load identities", true, 0.0, ""};
  const auto t0 = Clock::now();
  std::vector<RoadSurface> roads;
  for (const char* name : {"banked_arc", "offcamber_arc", "crest", "offcamber_uturn", "hill_s_curve"}) {
    roads.push_back(LoadRoad(ctx.Road(name)));
  }
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };

  const VehicleParams& p = ctx.vehicle;
  double e_metric = 0.0, e_normal = 0.0, e_sum = 0.0, e_moment = 0.0, e_newton = 0.0;
  for (int i = 0; i < kIdentityPoses; ++i) {
    const RoadSurface& road = roads[static_cast<std::size_t>(i) % roads.size()];
    const double s = uni(1.0, road.s_max() - 1.0);
    const double y = uni(-0.9, 0.9) * road.half_width();
    const double theta = uni(-0.4, 0.4), beta = uni(-0.15, 0.15);
    const double ks = uni(-0.05, 0.05), kb = uni(-0.05, 0.05);
    const StageParams st = MakeStage(road, p, s, y, theta, beta, ks, kb);

    const Eigen::Matrix2d jj = st.frame.j * st.frame.j.transpose();
    Eigen::Matrix2d metric;
    metric << st.jet.x_s.dot(st.jet.x_s), st.jet.x_s.dot(st.jet.x_y),
        st.jet.x_y.dot(st.jet.x_s), st.jet.x_y.dot(st.jet.x_y);
    e_metric = std::max(e_metric, (jj - metric).cwiseAbs().maxCoeff());

    const AffineScalar quad =
        NetNormalForceQuadratic(st.frame, st.forms, st.n, beta, theta, p);
    e_normal = std::max(e_normal, CoefErr(st.forces.body_force[2], quad));

    AffineScalar sum;
    for (const AffineScalar& n : st.normals.wheels()) sum += n;
    e_sum = std::max(e_sum, CoefErr(sum, st.forces.tire_force[2]));

    const double v2 = uni(0.0, 900.0), vd = uni(-10.0, 5.0);
    std::array<double, 4> loads{};
    const auto wheels = st.normals.wheels();
    for (int w = 0; w < 4; ++w) loads[w] = wheels[w](v2, vd);
    const oracle::LoadResultant lr = oracle::ReconstructFromWheels(
        loads, st.forces.tire_force[0](v2, vd), st.forces.tire_force[1](v2, vd), p);
    const auto euler = oracle::EulerMoments(st.unit_rates, p, v2, vd);
    const double scale = std::max({1.0, std::abs(euler[0]), std::abs(euler[1])});
    e_moment = std::max({e_moment, std::abs(lr.roll - euler[0]) / scale,
                         std::abs(lr.pitch - euler[1]) / scale,
                         std::abs(lr.sum - st.forces.tire_force[2](v2, vd)) /
                             std::max(1.0, std::abs(lr.sum))});

    const Eigen::Vector3d newton = oracle::NewtonForce(st.unit_rates, beta, kb, p, v2, vd);
    for (int k = 0; k < 3; ++k) {
      e_newton = std::max(e_newton, std::abs(st.forces.body_force[k](v2, vd) - newton[k]) /
                                        std::max(1.0, newton.cwiseAbs().maxCoeff()));
    }
  }
  r.seconds = Since(t0);
  const double worst = std::max({e_metric, e_normal, e_sum, e_moment, e_newton});
  r.pass = worst < kIdentityTol && r.seconds < kIdentitySeconds;
  std::ostringstream d;
  d << kIdentityPoses << " poses: JJ^T vs metric " << Fmt("%.1e", e_metric) << ", F3 two paths "
    << Fmt("%.1e", e_normal) << ", sum N " << Fmt("%.1e", e_sum) << ", moments "
    << Fmt("%.1e", e_moment) << ", Newton " << Fmt("%.1e", e_newton) << " (tol 1e-10), "
    << Fmt("%.2f", r.seconds) << " s (limit 5 s)";
  r.detail = d.str();
  return r;
}

// ---- 3 ----------------------------------------------------------------------

double BisectLimit(Context& ctx, const std::string& name, const RoadSurface& road, double s0,
                   double s1, int n, double guess) {
  const std::vector<StageParams> stages = BuildStages(road, ctx.vehicle, 0.0, s0, s1, n, {0.0});
  auto feasible = [&](double v0) {
    return ctx.Plan(name, stages, v0).status == SolveStatus::kOptimal;
  };
  double lo = 0.5 * guess, hi = 1.5 * guess;
  if (!feasible(lo) || feasible(hi)) return NAN;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

CriterionResult ClosedForms(Context& ctx) {
  CriterionResult r{3, "closed-form speed limits", true, 0.0, ""};
  const auto t0 = Clock::now();
  const VehicleParams& p = ctx.vehicle;
  const double g = p.gravity, mu = p.mu, h = p.cg_height;
  struct Case {
    std::string name;
    RoadSurface road;
    double s0, s1, expect_v2;
  };
  const double off = -std::atan(0.3);
  std::vector<Case> cases = {
      {"flat circle R=50", RoadSurface::BankedArc(50.0, 0.0, M_PI, 3.0), 20.0, 40.0,
       oracle::FlatCircleV2(mu, g, 50.0, h)},
      {"flat circle R=120", RoadSurface::BankedArc(120.0, 0.0, M_PI, 3.0), 20.0, 40.0,
       oracle::FlatCircleV2(mu, g, 120.0, h)},
      {"banked R=50 bank 0.2", RoadSurface::BankedArc(50.0, 0.2, M_PI, 3.0), 20.0, 40.0,
       oracle::BankedTurnV2(mu, g, 50.0, 0.2, h)},
      {"off-camber R=50 30%", RoadSurface::BankedArc(50.0, off, M_PI, 3.0), 20.0, 40.0,
       oracle::BankedTurnV2(mu, g, 50.0, off, h)},
      {"off-camber R=80 15%", RoadSurface::BankedArc(80.0, -std::atan(0.15), M_PI, 3.0), 20.0, 40.0,
       oracle::BankedTurnV2(mu, g, 80.0, -std::atan(0.15), h)},
      {"crest R=100", RoadSurface::Crest(100.0, 50.0, 3.0), 0.0, 2.0, oracle::CrestV2(g, 100.0, h)},
      {"crest R=250", RoadSurface::Crest(250.0, 50.0, 3.0), 0.0, 2.0, oracle::CrestV2(g, 250.0, h)},
  };
  std::ostringstream d;
  double worst = 0.0;
  for (const Case& c : cases) {
    const double v = BisectLimit(ctx, "bisect " + c.name, c.road, c.s0, c.s1, 5, std::sqrt(c.expect_v2));
    const double err = std::isfinite(v) ? std::abs(v * v / c.expect_v2 - 1.0) : INFINITY;
    worst = std::max(worst, err);
    if (!(err <= kClosedFormTol)) {
      r.pass = false;
      d << c.name << ": v2 " << v * v << " vs " << c.expect_v2 << "; ";
    }
  }
  r.seconds = Since(t0);
  if (r.seconds >= kClosedFormSeconds) r.pass = false;
  d << cases.size() << " roads, worst rel err " << Fmt("%.2e", worst) << " (tol 0.5%), "
    << Fmt("%.2f", r.seconds) << " s (limit 30 s)";
  r.detail = d.str();
  return r;
}

// ---- 4 ----------------------------------------------------------------------

struct DpScenario {
  std::string name;
  std::string road;
  double v0;
  int n;
  double s0, s1;
  std::vector<double> brake;
  ModelOptions options;
  double v2_max;
};

CriterionResult DpOracle(Context& ctx) {
  CriterionResult r{4, "optimizer vs dynamic programming", true, 0.0, ""};
  const auto t0 = Clock::now();
  auto ramp = [](int n, double a, double b) {
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(k < n / 2 ? a : b);
    return out;
  };
  ModelOptions literal;
  literal.paper_literal = true;
  ModelOptions planar;
  planar.planar_model = true;
  // spans end before standstill so the optimum stays unique
  const std::vector<DpScenario> scenarios = {
      {"plane hard brake", "plane", 25.0, 20, 0.0, 20.0, {-16000.0}, {}, 800.0},
      {"plane mixed demand", "plane", 22.0, 40, 0.0, 20.0, ramp(40, 1500.0, -17000.0), {}, 800.0},
      {"crest brake", "crest", 25.0, 20, 0.0, 40.0, {-15000.0}, {}, 800.0},
      {"banked arc brake", "banked_arc", 22.0, 40, 0.0, 20.0, {-12000.0}, {}, 700.0},
      {"off-camber arc brake", "offcamber_arc", 14.0, 20, 0.0, 10.0, {-9000.0}, {}, 400.0},
      {"hill brake", "hill_s_curve", 22.0, 40, 0.0, 20.0, {-14000.0}, {}, 700.0},
      {"u-turn lead brake", "offcamber_uturn", 22.0, 30, 100.0, 120.0, {-12000.0}, {}, 700.0},
      {"u-turn planar brake", "offcamber_uturn", 22.0, 30, 100.0, 120.0, {-12000.0}, planar, 700.0},
      {"banked arc literal", "banked_arc", 22.0, 40, 0.0, 20.0, {-12000.0}, literal, 700.0},
      {"crest mixed demand", "crest", 24.0, 60, 0.0, 60.0, ramp(60, -4000.0, -16000.0), {}, 800.0},
  };


  std::ostringstream d;
  double worst_obj = 0.0, worst_v2 = 0.0;
  for (const DpScenario& sc : scenarios) {
    const RoadSurface road = LoadRoad(ctx.Road(sc.road));
    const auto stages = BuildStages(road, ctx.vehicle, 0.0, sc.s0, sc.s1, sc.n, sc.brake, sc.options);
    const SpeedProfile prof = ctx.Plan("dp " + sc.name, stages, sc.v0, sc.options);
    const PlannerProgram& prog = ctx.cases.back().program;
    const auto forms = oracle::ExtractForms(stages);
    oracle::DpOptions opt;
    opt.v2_max = sc.v2_max;
    const oracle::ReferenceProfile ref = oracle::SolveDp(forms, sc.v0, prog.continuity_factor, opt);
    if (prof.status != SolveStatus::kOptimal || !ref.feasible) {
      r.pass = false;
      d << sc.name << ": status " << ToString(prof.status) << " dp " << ref.feasible << "; ";
      continue;
    }
    // objective scale floored at one vehicle weight
    const double weight = ctx.vehicle.mass * ctx.vehicle.gravity;
    const double obj_err =
        std::abs(ref.objective - prof.objective) / std::max(weight, std::abs(prof.objective));
    double v2_err = 0.0;
    for (std::size_t k = 0; k < stages.size(); ++k) {
      const double v2 = prof.stages[k].v2;
      v2_err = std::max(v2_err, std::abs(ref.v2[k] - v2) / std::max(1.0, v2));
    }
    worst_obj = std::max(worst_obj, obj_err);
    worst_v2 = std::max(worst_v2, v2_err);
    if (!(obj_err <= kDpObjectiveTol) || !(v2_err <= kDpSpeedTol)) {
      r.pass = false;
      d << sc.name << ": J " << prof.objective << " vs dp " << ref.objective << ", v2 err "
        << v2_err << "; ";
    }
  }
  r.seconds = Since(t0);
  if (r.seconds >= kDpSeconds) r.pass = false;
  d << scenarios.size() << " scenarios, objective err " << Fmt("%.2e", worst_obj)
    << " (tol 1% of max(J, m g)), v2 err " << Fmt("%.2e", worst_v2) << " (tol 2%), " << Fmt("%.2f", r.seconds)
    << " s (limit 120 s)";
  r.detail = d.str();
  return r;
}

// ---- 5 ----------------------------------------------------------------------

CriterionResult Certification(Context& ctx) {
  CriterionResult r{5, "solver certification", true, 0.0, ""};
  const auto t0 = Clock::now();
  std::ostringstream d;

  // 20 random planner-class instances against the ellipsoid reference.
  std::mt19937_64 rng(7741);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };
  const VehicleParams& p = ctx.vehicle;
  int made = 0, tries = 0;
  double worst_ref = 0.0;
  while (made < kReferenceInstances && tries < 200) {
    ++tries;
    const int kind = static_cast<int>(uni(0.0, 3.0));
    const int n = 3 + static_cast<int>(uni(0.0, 4.0));
    double limit2 = 0.0;
    RoadSurface road = RoadSurface::Plane(200.0, 3.0);
    if (kind == 0) {
      const double radius = uni(40.0, 150.0), bank = uni(-0.3, 0.3);
      road = RoadSurface::BankedArc(radius, bank, M_PI, 3.0);
      limit2 = oracle::BankedTurnV2(p.mu, p.gravity, radius, bank, p.cg_height);
    } else if (kind == 1) {
      const double radius = uni(60.0, 300.0);
      road = RoadSurface::Crest(radius, 120.0, 3.0);
      limit2 = oracle::CrestV2(p.gravity, radius, p.cg_height);
    } else {
      limit2 = 900.0;
    }
    const double v0 = std::sqrt(limit2) * uni(0.4, 0.9);
    const double s0 = uni(0.0, 20.0);
    const double s1 = s0 + uni(8.0, 40.0);
    std::vector<double> brake;
    for (int k = 0; k < n; ++k) brake.push_back(uni(-16000.0, 3000.0));
    const auto stages = BuildStages(road, p, 0.0, s0, s1, n, brake);
    const SpeedProfile prof = ctx.Plan("random " + std::to_string(made), stages, v0);
    if (prof.status != SolveStatus::kOptimal) continue;
    const auto forms = oracle::ExtractForms(stages);
    const oracle::ReferenceProfile ref = oracle::SolveEllipsoid(forms, v0, 1.0);
    const double err = ref.feasible ? std::abs(ref.objective - prof.objective) /
                                          std::max(1.0, std::abs(prof.objective))
                                    : INFINITY;
    worst_ref = std::max(worst_ref, err);
    if (!(err <= kReferenceTol)) {
      r.pass = false;
      d << "random " << made << ": J " << prof.objective << " vs ref " << ref.objective << "; ";
    }
    ++made;
  }
  if (made < kReferenceInstances) {
    r.pass = false;
    d << "only " << made << " feasible random instances; ";
  }

  // Independent residuals of every optimal solve in this run.
  int optimal = 0;
  double worst_cert = 0.0;
  for (const PlanCase& c : ctx.cases) {
    const ConicSolution sol = Solve(c.program.program);
    if (sol.status != SolveStatus::kOptimal) continue;
    ++optimal;
    const oracle::Certificate cert = oracle::Certify(c.program.program, sol.x, sol.y, sol.z);
    worst_cert = std::max(worst_cert, cert.worst());
    if (!(cert.worst() < kCertificateTol)) {
      r.pass = false;
      d << c.name << ": primal " << cert.primal << " dual " << cert.dual << " cone "
        << cert.dual_cone << " gap " << cert.gap << "; ";
    }
  }
  r.seconds = Since(t0);
  d << optimal << " optimal solves, worst residual " << Fmt("%.2e", worst_cert)
    << " (tol 1e-7); " << made << " random instances vs reference, worst "
    << Fmt("%.2e", worst_ref) << " (tol 1e-4), " << Fmt("%.2f", r.seconds) << " s";
  r.detail = d.str();
  return r;
}

// ---- 6 ----------------------------------------------------------------------

CriterionResult Scenarios(Context& ctx) {
  CriterionResult r{6, "off-camber u-turn reproduction", true, 0.0, ""};
  const auto t0 = Clock::now();
  std::ostringstream d;
  for (const char* name : {"uturn_none", "uturn_safety", "uturn_planar"}) {
    const auto t1 = Clock::now();
    const ScenarioConfig sc = LoadScenario(ctx.Scenario(name));
    const RoadSurface road = LoadRoad(sc.road);
    const VehicleConfig veh = LoadVehicle(sc.vehicle);
    const SimSettings settings = MakeSimSettings(sc, veh, ModelOptions{});
    const RunSummary sum = RunScenario(road, veh.params, settings, sc.mode).summary;
    const double secs = Since(t1);

    bool ok = secs < kScenarioSeconds;
    if (sc.mode == SimMode::kSafetySystem) {
      ok = ok && sum.completed && sum.max_abs_y <= road.half_width() &&
           sum.max_friction_util <= 1.0 && sum.min_wheel_load >= 0.0;
    } else {
      // departure, started above the steady banked-turn limit of the apex
      double kmax = 0.0, s_apex = 0.0;
      for (double s = 0.0; s <= road.s_max(); s += 0.5) {
        if (std::abs(road.Curvature(s)) > kmax) {
          kmax = std::abs(road.Curvature(s));
          s_apex = s;
        }
      }
      const double limit2 = oracle::BankedTurnV2(veh.params.mu, veh.params.gravity, 1.0 / kmax,
                                                 road.Bank(s_apex), veh.params.cg_height);
      ok = ok && !sum.completed && sum.reason == "off_road" && sc.v0 * sc.v0 > limit2;
    }
    r.pass = r.pass && ok;
    d << ToString(sc.mode) << ": " << (sum.completed ? "completed" : sum.reason)
      << " max|y| " << Fmt("%.2f", sum.max_abs_y) << " util "
      << Fmt("%.3f", sum.max_friction_util) << " minN " << Fmt("%.0f", sum.min_wheel_load)
      << " " << Fmt("%.2f", secs) << " s" << (ok ? "" : " FAIL") << "; ";
  }
  r.seconds = Since(t0);
  d << "(|y| <= half width, util <= 1, N >= 0, each < 10 s)";
  r.detail = d.str();
  return r;
}

// ---- 7 ----------------------------------------------------------------------

// Shipped planning scenarios, plain and with the printed forms.
void PlanShipped(Context& ctx) {
  for (const char* name : {"plane_plan", "crest_slow", "banked_arc_plan", "hill_plan", "uturn_plan"}) {
    const ScenarioConfig sc = LoadScenario(ctx.Scenario(name));
    const RoadSurface road = LoadRoad(sc.road);
    const VehicleConfig veh = LoadVehicle(sc.vehicle);
    for (bool literal : {false, true}) {
      ModelOptions opt;
      opt.paper_literal = literal;
      const auto stages = BuildStages(road, veh.params, sc.lane_offset, sc.s_start, sc.s_end,
                                      sc.num_stages, sc.brake_profile, opt);
      ctx.Plan(std::string("shipped ") + name, stages, sc.v0, opt);
    }
  }
}

CriterionResult Continuity(Context& ctx) {
  CriterionResult r{7, "continuity and initial condition", true, 0.0, ""};
  const auto t0 = Clock::now();
  std::ostringstream d;
  int checked = 0, exact = 0;
  double worst = 0.0;
  for (const PlanCase& c : ctx.cases) {
    if (c.profile.status != SolveStatus::kOptimal) continue;
    ++checked;
    std::vector<double> v2, vd;
    for (const StageResult& st : c.profile.stages) {
      v2.push_back(st.v2);
      vd.push_back(st.vdot);
    }
    const double res = oracle::ContinuityResidual(oracle::ExtractForms(c.stages), v2, vd,
                                                  c.program.continuity_factor);
    worst = std::max(worst, res);
    const bool init = v2.front() == c.program.v0 * c.program.v0;
    if (init) ++exact;
    if (!(res < kContinuityTol) || !init) {
      r.pass = false;
      d << c.name << ": residual " << res << " v2[0] " << v2.front() << "; ";
    }
  }
  r.seconds = Since(t0);
  d << checked << " profiles, max continuity residual " << Fmt("%.2e", worst)
    << " m^2/s^2 (tol 1e-6), initial condition exact in " << exact << "/" << checked;
  r.detail = d.str();
  return r;
}

CriterionResult Guarded(int id, const char* name, const std::function<CriterionResult()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {id, name, false, 0.0, std::string("threw: ") + e.what()};
  }
}

}  // namespace

std::vector<CriterionResult> RunAll(const std::string& data_dir) {
  Context ctx;
  ctx.data_dir = data_dir;
  ctx.vehicle = LoadVehicle(data_dir + "/vehicles/sedan.json").params;
  std::vector<CriterionResult> out;
  out.push_back(Guarded(1, "geometry finite differences", [&] { return Geometry(ctx); }));
  out.push_back(Guarded(2, "kinematic and load identities", [&] { return Identities(ctx); }));
  out.push_back(Guarded(3, "closed-form speed limits", [&] { return ClosedForms(ctx); }));
  out.push_back(Guarded(4, "optimizer vs dynamic programming", [&] { return DpOracle(ctx); }));
  std::string shipped_error;
  try {
    PlanShipped(ctx);
  } catch (const std::exception& e) {
    shipped_error = e.what();
  }
  out.push_back(Guarded(5, "solver certification", [&] { return Certification(ctx); }));
  out.push_back(Guarded(6, "off-camber u-turn reproduction", [&] { return Scenarios(ctx); }));
  out.push_back(Guarded(7, "continuity and initial condition", [&] {
    CriterionResult r = Continuity(ctx);
    if (!shipped_error.empty()) {
      r.pass = false;
      r.detail = "shipped plans threw: " + shipped_error + "; " + r.detail;
    }
    return r;
  }));
  return out;
}

}  // namespace npb::acceptance
