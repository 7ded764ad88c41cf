#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace npb {

using SparseMatrix = Eigen::SparseMatrix<double>;

// min c^T x  s.t.  A x = b,  G x + s = h,  s in K
// K = R^l_+ x SOC(d_1) x ... ; each SOC block is ordered (radius, rest...).
struct ConicProgram {
  Eigen::VectorXd c;
  SparseMatrix a;
  Eigen::VectorXd b;
  SparseMatrix g;
  Eigen::VectorXd h;
  int num_orthant = 0;
  std::vector<int> soc_dims;
  // Added to the objective after solving; used when callers fold constants.
  double objective_offset = 0.0;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }
  int num_ineq() const { return static_cast<int>(h.size()); }

  // Throws InvalidArgument when dimensions or cone blocks are inconsistent
  // or any entry is not finite.
  void Validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter, kNumericalFailure };

const char* ToString(SolveStatus status);

struct SolverSettings {
  int max_iter = 100;
  double tol = 1e-8;
  bool verbose = false;
};

// Direct substitution of a point into a program. Violations are signed:
// a feasible point has orthant and SOC violations <= 0.
struct ResidualReport {
  double equality = 0.0;          // max |A x - b|
  double orthant = 0.0;           // max (G x - h)_i over orthant rows
  double soc = 0.0;               // max ||u_1|| - u_0, u = h - G x per block
  double objective = 0.0;         // c^T x + offset
  double dual_objective = 0.0;    // -b^T y - h^T z + offset
  double gap = 0.0;               // objective - dual_objective
  double dual_residual = 0.0;     // max |A^T y + G^T z + c|
  double dual_cone = 0.0;         // max violation of z in K
  // Primal violations divided by 1 + max(|b|_inf, |h|_inf).
  double scaled_primal = 0.0;
  // |gap| divided by 1 + |objective|.
  double scaled_gap = 0.0;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // equality multipliers
  Eigen::VectorXd z;  // cone multipliers
  Eigen::VectorXd s;  // cone slacks
  int iterations = 0;
  ResidualReport residuals;
  std::string message;
};

ResidualReport Residuals(const ConicProgram& program, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y = {}, const Eigen::VectorXd& z = {});

ConicSolution Solve(const ConicProgram& program, const SolverSettings& settings = {});

}  // namespace npb
