#include "npbrake/speed_planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "npbrake/errors.hpp"

namespace npb {

StageParams MakeStage(const RoadSurface& road, const VehicleParams& params, double s,
                      double y, double theta_s, double beta, double kappa_s,
                      double kappa_beta, const ModelOptions& options) {
  return MakeStage(road.EvalJet(s, y), params, s, y, theta_s, beta, kappa_s, kappa_beta,
                   options);
}

StageParams MakeStage(const SurfaceJet& jet, const VehicleParams& params, double s, double y,
                      double theta_s, double beta, double kappa_s, double kappa_beta,
                      const ModelOptions& options) {
  StageParams st;
  st.s = s;
  st.y = y;
  st.n = params.cg_height;
  st.theta_s = theta_s;
  st.beta = beta;
  st.kappa_s = kappa_s;
  st.kappa_beta = kappa_beta;
  st.mu = params.mu;
  st.jet = jet;
  st.forms = ComputeFundamentalForms(st.jet, options.planar_model);
  st.frame = ComputeSurfaceFrame(st.jet, theta_s);
  const VelocityParam unit{1.0, beta, kappa_s, kappa_beta};
  st.unit_rates =
      ComputeBodyRates(st.jet, st.forms, st.frame, st.n, unit, options.theta_rate_variant);
  st.forces = ComputeForceSet(st.unit_rates, beta, st.frame, params);
  st.normals = DistributeLoad(st.forces.normal_moment, st.forces.tire_force[2], params,
                              options.paper_literal);
  return st;
}

std::vector<StageParams> BuildStages(const RoadSurface& road, const VehicleParams& params,
                                     double lane_offset, double s_start, double s_end,
                                     int num_stages, const std::vector<double>& brake_profile,
                                     const ModelOptions& options) {
  if (num_stages < 2) Throw(ErrorCode::kEmptyStages, "planner needs at least 2 stages");
  if (!(s_end > s_start)) Throw(ErrorCode::kInvalidArgument, "s_end must exceed s_start");
  if (brake_profile.size() != 1 && brake_profile.size() != static_cast<std::size_t>(num_stages)) {
    Throw(ErrorCode::kInvalidArgument, "B profile must hold 1 or N values");
  }
  params.Validate();
  std::vector<StageParams> stages;
  stages.reserve(num_stages);
  double l = 0.0;
  for (int k = 0; k < num_stages; ++k) {
    const double s = s_start + (s_end - s_start) * k / (num_stages - 1);
    if (!road.InDomain(s, lane_offset)) {
      std::ostringstream msg;
      msg << "stage " << k << " at s=" << s << ", y=" << lane_offset << " is off the road";
      Throw(ErrorCode::kOutOfDomain, msg.str());
    }
    if (k > 0) l += LaneArclength(road, lane_offset, stages.back().s, s);
    StageParams st = MakeStage(road, params, s, lane_offset, 0.0, 0.0, 0.0, 0.0, options);
    st.index = k;
    st.l = l;
    st.brake_target = brake_profile.size() == 1 ? brake_profile[0] : brake_profile[k];
    stages.push_back(std::move(st));
  }
  return stages;
}

namespace {

// Rows of G x + s = h built from "expr >= 0" or cone entries "expr" with
// expr affine in the stage variables.
class RowBuilder {
 public:
  explicit RowBuilder(std::vector<Eigen::Triplet<double>>& g, std::vector<double>& h)
      : g_(g), h_(h) {}

  // s = c0 + a_v2 v2 + a_vd vd + extra terms
  void Add(const AffineScalar& expr, int v2_col, int vd_col,
           std::initializer_list<std::pair<int, double>> extra = {}) {
    const int row = static_cast<int>(h_.size());
    if (expr.c_v2 != 0.0) g_.emplace_back(row, v2_col, -expr.c_v2);
    if (expr.c_vd != 0.0) g_.emplace_back(row, vd_col, -expr.c_vd);
    for (const auto& [col, coef] : extra) {
      if (coef != 0.0) g_.emplace_back(row, col, -coef);
    }
    h_.push_back(expr.c0);
  }

 private:
  std::vector<Eigen::Triplet<double>>& g_;
  std::vector<double>& h_;
};

// phase1: no epigraph slacks; each stage gets one relaxation variable added
// to every contact/friction/sign row, objective sum of relaxations.
ConicProgram BuildProgram(const std::vector<StageParams>& stages, double v0, double factor,
                          bool phase1) {
  const int n_st = static_cast<int>(stages.size());
  const int per = phase1 ? 2 : 3;
  const int n = 3 * n_st;
  auto v2 = [&](int k) { return per * k; };
  auto vd = [&](int k) { return per * k + 1; };
  auto aux = [&](int k) { return phase1 ? 2 * n_st + k : 3 * k + 2; };

  ConicProgram p;
  p.c = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n_st; ++k) p.c[aux(k)] = 1.0;

  std::vector<Eigen::Triplet<double>> ta;
  std::vector<double> b;
  ta.emplace_back(0, v2(0), 1.0);
  b.push_back(v0 * v0);
  for (int k = 0; k + 1 < n_st; ++k) {
    const int row = static_cast<int>(b.size());
    const double dl = stages[k + 1].l - stages[k].l;
    ta.emplace_back(row, v2(k + 1), 1.0);
    ta.emplace_back(row, v2(k), -1.0);
    ta.emplace_back(row, vd(k), -factor * dl);
    ta.emplace_back(row, vd(k + 1), -factor * dl);
    b.push_back(0.0);
  }

  std::vector<Eigen::Triplet<double>> tg;
  std::vector<double> h;
  RowBuilder rows(tg, h);
  for (int k = 0; k < n_st; ++k) {
    const StageParams& st = stages[k];
    const AffineScalar margin = st.forces.tire_force[0] - AffineScalar::Constant(st.brake_target);
    const double relax = phase1 ? 1.0 : 0.0;
    if (!phase1) {
      rows.Add(-margin, v2(k), vd(k), {{aux(k), 1.0}});
      rows.Add(margin, v2(k), vd(k), {{aux(k), 1.0}});
    } else {
      rows.Add(AffineScalar{}, v2(k), vd(k), {{aux(k), 1.0}});
    }
    rows.Add(AffineScalar::SpeedSquared(1.0), v2(k), vd(k), {{aux(k), relax}});
    for (const AffineScalar& normal : st.normals.wheels()) {
      rows.Add(normal, v2(k), vd(k), {{aux(k), relax}});
    }
  }
  p.num_orthant = static_cast<int>(h.size());
  for (int k = 0; k < n_st; ++k) {
    const StageParams& st = stages[k];
    const double relax = phase1 ? 1.0 : 0.0;
    rows.Add(st.mu * st.forces.tire_force[2], v2(k), vd(k), {{aux(k), relax}});
    rows.Add(st.forces.tire_force[0], v2(k), vd(k));
    rows.Add(st.forces.tire_force[1], v2(k), vd(k));
    p.soc_dims.push_back(3);
  }

  p.a.resize(static_cast<int>(b.size()), n);
  p.a.setFromTriplets(ta.begin(), ta.end());
  p.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<int>(b.size()));
  p.g.resize(static_cast<int>(h.size()), n);
  p.g.setFromTriplets(tg.begin(), tg.end());
  p.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<int>(h.size()));
  return p;
}

double ContinuityFactor(const ModelOptions& options) { return options.paper_literal ? 0.5 : 1.0; }

}  // namespace

PlannerProgram AssembleProgram(const std::vector<StageParams>& stages, double v0,
                               const ModelOptions& options) {
  if (stages.empty()) Throw(ErrorCode::kEmptyStages, "no stages to assemble");
  if (!(v0 >= 0.0) || !std::isfinite(v0)) {
    Throw(ErrorCode::kInvalidArgument, "initial speed must be finite and >= 0");
  }
  for (std::size_t k = 1; k < stages.size(); ++k) {
    if (!(stages[k].l > stages[k - 1].l)) {
      Throw(ErrorCode::kInvalidArgument, "stage arc length must increase strictly");
    }
  }
  PlannerProgram out;
  out.num_stages = static_cast<int>(stages.size());
  out.v0 = v0;
  out.continuity_factor = ContinuityFactor(options);
  out.program = BuildProgram(stages, v0, out.continuity_factor, false);
  return out;
}

namespace {

StageResult EvaluateStage(const StageParams& st, double v2, double vdot, double threshold) {
  StageResult r;
  r.k = st.index;
  r.s = st.s;
  r.l = st.l;
  r.v2 = v2;
  r.vdot = vdot;
  for (int i = 0; i < 3; ++i) r.tire_force[i] = st.forces.tire_force[i](v2, vdot);
  r.margin = r.tire_force[0] - st.brake_target;
  const double grip = st.mu * r.tire_force[2];
  const double planar = std::hypot(r.tire_force[0], r.tire_force[1]);
  r.friction_util = grip > 0.0 ? planar / grip : (planar > 0.0 ? INFINITY : 0.0);
  const auto wheels = st.normals.wheels();
  for (int i = 0; i < 4; ++i) r.normals[i] = wheels[i](v2, vdot);
  r.min_normal = *std::min_element(r.normals.begin(), r.normals.end());
  r.flag = std::abs(r.margin) > threshold;
  return r;
}

int FirstInfeasibleStage(const std::vector<StageParams>& stages, double v0, double factor,
                         const SolverSettings& settings, double force_scale) {
  const ConicProgram p1 = BuildProgram(stages, v0, factor, true);
  const ConicSolution sol = Solve(p1, settings);
  // a stalled Phase-1 solve still locates the violation
  const bool usable = sol.status == SolveStatus::kOptimal ||
                      (sol.status == SolveStatus::kMaxIter && sol.residuals.scaled_primal < 1e-6);
  if (!usable) return -1;
  const int n_st = static_cast<int>(stages.size());
  for (int k = 0; k < n_st; ++k) {
    if (sol.x[2 * n_st + k] > 1e-6 * force_scale) return k;
  }
  return -1;
}

}  // namespace

SpeedProfile SolveProfile(const PlannerProgram& program, const std::vector<StageParams>& stages,
                          const SolverSettings& settings, double flag_threshold) {
  if (static_cast<int>(stages.size()) != program.num_stages) {
    Throw(ErrorCode::kInvalidArgument, "stage list does not match the program");
  }
  SpeedProfile out;
  const ConicSolution sol = Solve(program.program, settings);
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.residuals = sol.residuals;
  out.message = sol.message;
  if (sol.status == SolveStatus::kInfeasible) {
    double scale = 1.0;
    for (const StageParams& st : stages) {
      scale = std::max(scale, std::abs(st.forces.tire_force[2].c0));
    }
    out.first_infeasible_stage =
        FirstInfeasibleStage(stages, program.v0, program.continuity_factor, settings, scale);
    std::ostringstream msg;
    msg << "no admissible speed profile";
    if (out.first_infeasible_stage >= 0) {
      const StageParams& st = stages[out.first_infeasible_stage];
      msg << "; first violated stage " << out.first_infeasible_stage << " at s=" << st.s;
    }
    out.message = msg.str();
    return out;
  }
  if (sol.status != SolveStatus::kOptimal) return out;

  out.objective = sol.residuals.objective;
  double worst = 0.0;
  for (int k = 0; k < program.num_stages; ++k) {
    const double v2 = sol.x[PlannerProgram::V2(k)];
    const double vd = sol.x[PlannerProgram::Vdot(k)];
    StageResult r = EvaluateStage(stages[k], v2, vd, flag_threshold);
    worst = std::max({worst, -r.v2, -r.min_normal,
                      std::hypot(r.tire_force[0], r.tire_force[1]) - stages[k].mu * r.tire_force[2]});
    out.stages.push_back(r);
  }
  for (int k = 0; k + 1 < program.num_stages; ++k) {
    const StageResult& a = out.stages[k];
    const StageResult& b = out.stages[k + 1];
    const double res = b.v2 - a.v2 - program.continuity_factor * (a.vdot + b.vdot) * (b.l - a.l);
    out.continuity_residual = std::max(out.continuity_residual, std::abs(res));
  }
  out.initial_residual = std::abs(out.stages.front().v2 - program.v0 * program.v0);
  out.max_violation = worst;
  return out;
}

std::vector<Intervention> InterventionReport(const SpeedProfile& profile, double threshold) {
  std::vector<Intervention> out;
  out.reserve(profile.stages.size());
  for (const StageResult& r : profile.stages) {
    out.push_back({r.margin, std::abs(r.margin) > threshold});
  }
  return out;
}

}  // namespace npb
