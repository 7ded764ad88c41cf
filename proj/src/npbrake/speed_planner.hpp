#pragma once

#include <array>
#include <vector>

#include "npbrake/conic_solver.hpp"
#include "npbrake/force_model.hpp"
#include "npbrake/kinematics.hpp"
#include "npbrake/road_surface.hpp"

namespace npb {

struct ModelOptions {
  // Printed load-transfer and velocity-continuity forms.
  bool paper_literal = false;
  ThetaRateVariant theta_rate_variant = ThetaRateVariant::kSymmetric;
  // Plan as if the road were flat (second fundamental form forced to 0).
  bool planar_model = false;
};

struct StageParams {
  int index = 0;
  double s = 0.0;
  double y = 0.0;
  double n = 0.0;
  double theta_s = 0.0;
  double beta = 0.0;
  double kappa_s = 0.0;
  double kappa_beta = 0.0;
  double l = 0.0;
  double mu = 0.0;
  double brake_target = 0.0;  // B
  SurfaceJet jet;
  FundamentalForms forms;
  SurfaceFrame frame;
  BodyRates unit_rates;
  ForceSet forces;
  WheelNormals normals;
};

// Stage model at an arbitrary pose; l, index and brake_target are left 0.
StageParams MakeStage(const RoadSurface& road, const VehicleParams& params, double s,
                      double y, double theta_s, double beta, double kappa_s,
                      double kappa_beta, const ModelOptions& options = {});

// Same from a precomputed surface jet at (s, y).
StageParams MakeStage(const SurfaceJet& jet, const VehicleParams& params, double s, double y,
                      double theta_s, double beta, double kappa_s, double kappa_beta,
                      const ModelOptions& options = {});

// Lane following at y = lane_offset: theta_s = beta = kappa_s = kappa_beta = 0,
// stages uniform in s. brake_profile holds one value (constant) or N values.
std::vector<StageParams> BuildStages(const RoadSurface& road, const VehicleParams& params,
                                     double lane_offset, double s_start, double s_end,
                                     int num_stages, const std::vector<double>& brake_profile,
                                     const ModelOptions& options = {});

// Variables per stage k: v2 at 3k, vdot at 3k+1, t at 3k+2.
struct PlannerProgram {
  ConicProgram program;
  int num_stages = 0;
  double v0 = 0.0;
  double continuity_factor = 1.0;

  static int V2(int k) { return 3 * k; }
  static int Vdot(int k) { return 3 * k + 1; }
  static int Slack(int k) { return 3 * k + 2; }
};

PlannerProgram AssembleProgram(const std::vector<StageParams>& stages, double v0,
                               const ModelOptions& options = {});

struct StageResult {
  int k = 0;
  double s = 0.0;
  double l = 0.0;
  double v2 = 0.0;
  double vdot = 0.0;
  Eigen::Vector3d tire_force = Eigen::Vector3d::Zero();
  double margin = 0.0;  // F^t_1 - B
  double friction_util = 0.0;
  std::array<double, 4> normals{};  // fr, fl, rr, rl
  double min_normal = 0.0;
  bool flag = false;
};

struct SpeedProfile {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<StageResult> stages;
  double objective = 0.0;
  int iterations = 0;
  // Recomputed from the stage models, not from solver internals.
  double continuity_residual = 0.0;
  double initial_residual = 0.0;
  double max_violation = 0.0;
  ResidualReport residuals;
  // First stage whose constraints cannot be met (Phase-1), or -1.
  int first_infeasible_stage = -1;
  std::string message;
};

SpeedProfile SolveProfile(const PlannerProgram& program, const std::vector<StageParams>& stages,
                          const SolverSettings& settings = {}, double flag_threshold = 1.0);

struct Intervention {
  double margin = 0.0;
  bool flag = false;
};

std::vector<Intervention> InterventionReport(const SpeedProfile& profile,
                                             double threshold = 1.0);

}  // namespace npb
