#include "npbrake/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "npbrake/errors.hpp"

namespace npb {

const char* ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void ConicProgram::Validate() const {
  const int n = num_vars();
  auto fail = [](const std::string& what) { Throw(ErrorCode::kInvalidArgument, what); };
  if (n == 0) fail("program has no variables");
  if (a.cols() != n || a.rows() != b.size()) fail("A must be num_eq x num_vars");
  if (g.cols() != n || g.rows() != h.size()) fail("G must be num_ineq x num_vars");
  if (num_orthant < 0) fail("negative orthant dimension");
  int rows = num_orthant;
  for (int d : soc_dims) {
    if (d < 2) fail("second-order cone blocks need dimension >= 2");
    rows += d;
  }
  if (rows != num_ineq()) fail("cone blocks must partition the inequality rows");
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!finite(c) || !finite(b) || !finite(h) || !std::isfinite(objective_offset)) {
    fail("program vectors must be finite");
  }
  for (const SparseMatrix* m : {&a, &g}) {
    for (int k = 0; k < m->outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(*m, k); it; ++it) {
        if (!std::isfinite(it.value())) fail("program matrices must be finite");
      }
    }
  }
}

namespace {

double InfNorm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

struct Cones {
  int l = 0;
  std::vector<int> q;
  std::vector<int> offsets;  // start row of each SOC block
  int rows = 0;
  int degree = 0;

  Cones(int orthant, const std::vector<int>& soc) : l(orthant), q(soc) {
    rows = l;
    for (int d : q) {
      offsets.push_back(rows);
      rows += d;
    }
    degree = l + static_cast<int>(q.size());
  }

  Eigen::VectorXd Identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
    e.head(l).setOnes();
    for (int off : offsets) e[off] = 1.0;
    return e;
  }
};

// Distance past the cone boundary along the identity: the smallest alpha
// with v + alpha e in K (negative when v is interior).
double ConeViolation(const Cones& k, const Eigen::VectorXd& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k.l; ++i) worst = std::max(worst, -v[i]);
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], d = k.q[b];
    worst = std::max(worst, v.segment(off + 1, d - 1).norm() - v[off]);
  }
  return k.rows ? worst : -1.0;
}

Eigen::VectorXd JordanProduct(const Cones& k, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& v) {
  Eigen::VectorXd out(k.rows);
  out.head(k.l) = u.head(k.l).cwiseProduct(v.head(k.l));
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], d = k.q[b];
    out[off] = u.segment(off, d).dot(v.segment(off, d));
    out.segment(off + 1, d - 1) =
        u[off] * v.segment(off + 1, d - 1) + v[off] * u.segment(off + 1, d - 1);
  }
  return out;
}

// Solves lambda o x = d for x.
Eigen::VectorXd JordanDivide(const Cones& k, const Eigen::VectorXd& lambda,
                             const Eigen::VectorXd& d) {
  Eigen::VectorXd out(k.rows);
  out.head(k.l) = d.head(k.l).cwiseQuotient(lambda.head(k.l));
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], n = k.q[b];
    const double l0 = lambda[off];
    const auto l1 = lambda.segment(off + 1, n - 1);
    const double det = (l0 - l1.norm()) * (l0 + l1.norm());
    const double x0 = (l0 * d[off] - l1.dot(d.segment(off + 1, n - 1))) / det;
    out[off] = x0;
    out.segment(off + 1, n - 1) = (d.segment(off + 1, n - 1) - x0 * l1) / l0;
  }
  return out;
}

// Largest alpha with u + alpha du in K (infinity when unbounded).
double MaxStep(const Cones& k, const Eigen::VectorXd& u, const Eigen::VectorXd& du) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k.l; ++i) {
    if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
  }
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], n = k.q[b];
    const double u0 = u[off], d0 = du[off];
    const auto u1 = u.segment(off + 1, n - 1);
    const auto d1 = du.segment(off + 1, n - 1);
    const double qa = d0 * d0 - d1.squaredNorm();
    const double qb = 2.0 * (u0 * d0 - u1.dot(d1));
    const double qc = (u0 - u1.norm()) * (u0 + u1.norm());
    double root = std::numeric_limits<double>::infinity();
    if (std::abs(qa) < 1e-300) {
      if (qb < 0.0) root = -qc / qb;
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (qb + std::copysign(sq, qb));
        const double r1 = qq / qa;
        const double r2 = qq != 0.0 ? qc / qq : std::numeric_limits<double>::infinity();
        for (double r : {r1, r2}) {
          if (r > 0.0) root = std::min(root, r);
        }
      }
    }
    // A step can only leave K through the boundary, but guard the branch
    // u0 + alpha d0 >= 0 as well.
    if (d0 < 0.0) root = std::min(root, -u0 / d0);
    alpha = std::min(alpha, root);
  }
  return alpha;
}

// Nesterov-Todd scaling W with W z = W^-1 s = lambda.
struct NtScaling {
  Eigen::VectorXd orth;  // W diagonal on the orthant
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::MatrixXd> winv;
  Eigen::VectorXd lambda;
};

NtScaling ComputeScaling(const Cones& k, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
  NtScaling sc;
  sc.orth = (s.head(k.l).array() / z.head(k.l).array()).sqrt();
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], n = k.q[b];
    const Eigen::VectorXd sb = s.segment(off, n), zb = z.segment(off, n);
    const double sn = std::sqrt((sb[0] - sb.tail(n - 1).norm()) * (sb[0] + sb.tail(n - 1).norm()));
    const double zn = std::sqrt((zb[0] - zb.tail(n - 1).norm()) * (zb[0] + zb.tail(n - 1).norm()));
    const Eigen::VectorXd sbar = sb / sn, zbar = zb / zn;
    const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    Eigen::VectorXd wbar(n);
    wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
    wbar.tail(n - 1) = (sbar.tail(n - 1) - zbar.tail(n - 1)) / (2.0 * gamma);
    const double eta = std::sqrt(sn / zn);
    const Eigen::VectorXd w1 = wbar.tail(n - 1);
    Eigen::MatrixXd core = Eigen::MatrixXd::Identity(n - 1, n - 1) +
                           w1 * w1.transpose() / (1.0 + wbar[0]);
    Eigen::MatrixXd w(n, n), wi(n, n);
    w(0, 0) = wbar[0];
    w.block(0, 1, 1, n - 1) = w1.transpose();
    w.block(1, 0, n - 1, 1) = w1;
    w.block(1, 1, n - 1, n - 1) = core;
    wi = w;
    wi.block(0, 1, 1, n - 1) *= -1.0;
    wi.block(1, 0, n - 1, 1) *= -1.0;
    sc.w.push_back(eta * w);
    sc.winv.push_back(wi / eta);
  }
  sc.lambda.resize(k.rows);
  sc.lambda.head(k.l) = (s.head(k.l).array() * z.head(k.l).array()).sqrt();
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], n = k.q[b];
    sc.lambda.segment(off, n) = sc.w[b] * z.segment(off, n);
  }
  return sc;
}

Eigen::VectorXd ApplyW(const Cones& k, const NtScaling& sc, const Eigen::VectorXd& v, bool inverse) {
  Eigen::VectorXd out(k.rows);
  if (inverse) {
    out.head(k.l) = v.head(k.l).cwiseQuotient(sc.orth);
  } else {
    out.head(k.l) = v.head(k.l).cwiseProduct(sc.orth);
  }
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], n = k.q[b];
    out.segment(off, n) = (inverse ? sc.winv[b] : sc.w[b]) * v.segment(off, n);
  }
  return out;
}

struct Direction {
  Eigen::VectorXd x, y, z;
};

// Solves [0 A' G'; A 0 0; G 0 -W^2] (x, y, z) = (rx, ry, rz) with a sparse
// LDL' factorization of the quasi-definite matrix
// [dI A' G'; A -dI 0; G 0 -W^2 - dI], refined against the unperturbed system.
class KktSolver {
 public:
  bool Factor(const SparseMatrix& a, const SparseMatrix& g, const Cones& k, const NtScaling& sc) {
    a_ = &a;
    g_ = &g;
    k_ = &k;
    sc_ = &sc;
    const int n = static_cast<int>(a.cols()), m = static_cast<int>(a.rows());
    const int p = k.rows;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() + g.nonZeros() + n + m + 9 * p));
    for (int j = 0; j < n; ++j) t.emplace_back(j, j, kStatic);
    for (int j = 0; j < m; ++j) t.emplace_back(n + j, n + j, -kStatic);
    for (int c = 0; c < a.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
        t.emplace_back(n + static_cast<int>(it.row()), c, it.value());
      }
    }
    for (int c = 0; c < g.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(g, c); it; ++it) {
        t.emplace_back(n + m + static_cast<int>(it.row()), c, it.value());
      }
    }
    const int zo = n + m;
    for (int i = 0; i < k.l; ++i) {
      t.emplace_back(zo + i, zo + i, -sc.orth[i] * sc.orth[i] - kStatic);
    }
    for (std::size_t b = 0; b < k.q.size(); ++b) {
      const int off = k.offsets[b], d = k.q[b];
      const Eigen::MatrixXd w2 = sc.w[b] * sc.w[b];
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c <= r; ++c) {
          t.emplace_back(zo + off + r, zo + off + c, -w2(r, c) - (r == c ? kStatic : 0.0));
        }
      }
    }
    kkt_.resize(n + m + p, n + m + p);
    kkt_.setFromTriplets(t.begin(), t.end());
    if (!analyzed_) {
      ldl_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    delta_ = kStatic;
    while (!Factorize()) {
      if (!Escalate()) return false;
    }
    return true;
  }

  Direction Solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& ry, const Eigen::VectorXd& rz) {
    const int n = static_cast<int>(a_->cols()), m = static_cast<int>(a_->rows());
    const int p = k_->rows;
    Eigen::VectorXd rhs(n + m + p);
    rhs << rx, ry, rz;
    const double ref = 1.0 + InfNorm(rhs);
    Eigen::VectorXd best;
    double best_err = std::numeric_limits<double>::infinity();
    for (;;) {
      Eigen::VectorXd sol = ldl_.solve(rhs);
      // accuracy against the shifted matrix the factors represent
      const double own = sol.allFinite() ? InfNorm(rhs - kkt_.selfadjointView<Eigen::Lower>() * sol)
                                         : std::numeric_limits<double>::infinity();
      for (int it = 0; it < 8 && sol.allFinite(); ++it) {
        const Eigen::VectorXd r = rhs - Apply(sol, n, m);
        const double err = InfNorm(r);
        if (err < best_err) {
          best_err = err;
          best = sol;
        }
        if (err < 1e-14 * ref) break;
        sol += ldl_.solve(r);
      }
      if (own < 1e-8 * ref) break;
      bool refactored = false;
      while (Escalate()) {
        if (Factorize()) {
          refactored = true;
          break;
        }
      }
      if (!refactored) break;
    }
    if (best.size() == 0) best = Eigen::VectorXd::Zero(n + m + p);
    Direction d;
    d.x = best.head(n);
    d.y = best.segment(n, m);
    d.z = best.tail(p);
    return d;
  }

 private:
  static constexpr double kStatic = 1e-9;
  static constexpr double kMaxShift = 1e-3;

  bool Factorize() {
    ldl_.factorize(kkt_);
    return ldl_.info() == Eigen::Success && ldl_.vectorD().allFinite() &&
           ldl_.vectorD().cwiseAbs().minCoeff() > 0.0;
  }

  // Raises the diagonal shift by 100x, false once it hits the cap.
  bool Escalate() {
    if (delta_ * 100.0 > kMaxShift) return false;
    const int n = static_cast<int>(a_->cols());
    for (int j = 0; j < kkt_.rows(); ++j) {
      kkt_.coeffRef(j, j) += (j < n ? 1.0 : -1.0) * 99.0 * delta_;
    }
    delta_ *= 100.0;
    return true;
  }

  // Unperturbed KKT matrix times v.
  Eigen::VectorXd Apply(const Eigen::VectorXd& v, int n, int m) const {
    const int p = k_->rows;
    const auto x = v.head(n);
    const auto y = v.segment(n, m);
    const Eigen::VectorXd z = v.tail(p);
    Eigen::VectorXd out(n + m + p);
    out.head(n) = a_->transpose() * y + g_->transpose() * z;
    out.segment(n, m) = (*a_) * x;
    out.tail(p) = (*g_) * x - ApplyW(*k_, *sc_, ApplyW(*k_, *sc_, z, false), false);
    return out;
  }

  const SparseMatrix* a_ = nullptr;
  const SparseMatrix* g_ = nullptr;
  const Cones* k_ = nullptr;
  const NtScaling* sc_ = nullptr;
  bool analyzed_ = false;
  double delta_ = kStatic;
  SparseMatrix kkt_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldl_;
};

// Removes variables fixed by single-entry equality rows.
struct Presolved {
  ConicProgram reduced;
  std::vector<int> kept;            // reduced column -> original column
  std::vector<int> kept_rows;       // reduced eq row -> original row
  std::vector<int> fixing_row;      // original column -> fixing row or -1
  Eigen::VectorXd fixed_value;      // per original column
  bool inconsistent = false;
};

Presolved Presolve(const ConicProgram& p) {
  Presolved out;
  const int n = p.num_vars();
  out.fixing_row.assign(n, -1);
  out.fixed_value = Eigen::VectorXd::Zero(n);
  const SparseMatrix a_rows = SparseMatrix(p.a.transpose());  // column k = row k of A
  std::vector<bool> drop_row(p.num_eq(), false);
  for (int r = 0; r < p.num_eq(); ++r) {
    int nnz = 0, col = -1;
    double val = 0.0;
    for (SparseMatrix::InnerIterator it(a_rows, r); it; ++it) {
      if (it.value() != 0.0) {
        ++nnz;
        col = static_cast<int>(it.row());
        val = it.value();
      }
    }
    if (nnz != 1) continue;
    const double value = p.b[r] / val;
    if (out.fixing_row[col] >= 0) {
      if (std::abs(out.fixed_value[col] - value) > 1e-12 * (1.0 + std::abs(value))) {
        out.inconsistent = true;
      }
    } else {
      out.fixing_row[col] = r;
      out.fixed_value[col] = value;
    }
    drop_row[r] = true;
  }
  std::vector<int> col_map(n, -1);
  for (int j = 0; j < n; ++j) {
    if (out.fixing_row[j] < 0) {
      col_map[j] = static_cast<int>(out.kept.size());
      out.kept.push_back(j);
    }
  }
  std::vector<int> row_map(p.num_eq(), -1);
  for (int r = 0; r < p.num_eq(); ++r) {
    if (!drop_row[r]) {
      row_map[r] = static_cast<int>(out.kept_rows.size());
      out.kept_rows.push_back(r);
    }
  }
  ConicProgram& q = out.reduced;
  const int nk = static_cast<int>(out.kept.size());
  q.c.resize(nk);
  for (int j = 0; j < nk; ++j) q.c[j] = p.c[out.kept[j]];
  q.objective_offset = p.objective_offset + p.c.dot(out.fixed_value);
  q.b.resize(static_cast<int>(out.kept_rows.size()));
  for (std::size_t r = 0; r < out.kept_rows.size(); ++r) q.b[r] = p.b[out.kept_rows[r]];
  {
    const Eigen::VectorXd shift = p.a * out.fixed_value;
    for (std::size_t r = 0; r < out.kept_rows.size(); ++r) q.b[r] = p.b[out.kept_rows[r]] - shift[out.kept_rows[r]];
  }
  q.h = p.h - p.g * out.fixed_value;
  std::vector<Eigen::Triplet<double>> ta, tg;
  for (int k = 0; k < p.a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(p.a, k); it; ++it) {
      const int r = row_map[it.row()], c = col_map[it.col()];
      if (r >= 0 && c >= 0) ta.emplace_back(r, c, it.value());
    }
  }
  for (int k = 0; k < p.g.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(p.g, k); it; ++it) {
      const int c = col_map[it.col()];
      if (c >= 0) tg.emplace_back(static_cast<int>(it.row()), c, it.value());
    }
  }
  q.a.resize(static_cast<int>(out.kept_rows.size()), nk);
  q.a.setFromTriplets(ta.begin(), ta.end());
  q.g.resize(p.num_ineq(), nk);
  q.g.setFromTriplets(tg.begin(), tg.end());
  q.num_orthant = p.num_orthant;
  q.soc_dims = p.soc_dims;
  return out;
}

// Ruiz equilibration: A' = Da A E, G' = Dg G E, c' = E c / cscale.
struct Equilibration {
  Eigen::VectorXd da, dg, e;
  double cscale = 1.0;
};

Equilibration Equilibrate(ConicProgram& p, const Cones& k) {
  const int n = p.num_vars();
  Equilibration eq{Eigen::VectorXd::Ones(p.num_eq()), Eigen::VectorXd::Ones(p.num_ineq()),
                   Eigen::VectorXd::Ones(n), 1.0};
  for (int pass = 0; pass < 15; ++pass) {
    Eigen::VectorXd ra = Eigen::VectorXd::Zero(p.num_eq());
    Eigen::VectorXd rg = Eigen::VectorXd::Zero(p.num_ineq());
    Eigen::VectorXd cn = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < p.a.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(p.a, c); it; ++it) {
        ra[it.row()] = std::max(ra[it.row()], std::abs(it.value()));
        cn[it.col()] = std::max(cn[it.col()], std::abs(it.value()));
      }
    }
    for (int c = 0; c < p.g.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(p.g, c); it; ++it) {
        rg[it.row()] = std::max(rg[it.row()], std::abs(it.value()));
        cn[it.col()] = std::max(cn[it.col()], std::abs(it.value()));
      }
    }
    for (std::size_t b = 0; b < k.q.size(); ++b) {
      const double m = rg.segment(k.offsets[b], k.q[b]).maxCoeff();
      rg.segment(k.offsets[b], k.q[b]).setConstant(m);
    }
    auto inv_sqrt = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
    const Eigen::VectorXd sa = ra.unaryExpr(inv_sqrt);
    const Eigen::VectorXd sg = rg.unaryExpr(inv_sqrt);
    const Eigen::VectorXd se = cn.unaryExpr(inv_sqrt);
    p.a = sa.asDiagonal() * p.a * se.asDiagonal();
    p.g = sg.asDiagonal() * p.g * se.asDiagonal();
    eq.da = eq.da.cwiseProduct(sa);
    eq.dg = eq.dg.cwiseProduct(sg);
    eq.e = eq.e.cwiseProduct(se);
    const double spread = std::max(
        {ra.size() ? ra.maxCoeff() : 1.0, rg.size() ? rg.maxCoeff() : 1.0, cn.maxCoeff()});
    if (std::abs(spread - 1.0) < 1e-3 && pass > 2) break;
  }
  p.b = eq.da.cwiseProduct(p.b);
  p.h = eq.dg.cwiseProduct(p.h);
  p.c = eq.e.cwiseProduct(p.c);
  const double cn = InfNorm(p.c);
  eq.cscale = cn > 0.0 ? cn : 1.0;
  p.c /= eq.cscale;
  return eq;
}

enum class CoreStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter, kNumerical };

struct CoreResult {
  CoreStatus status = CoreStatus::kNumerical;
  Eigen::VectorXd x, y, z, s;
  int iterations = 0;
  std::string message;
};

// Stopping tests are measured in the units of the unscaled program.
CoreResult SolveHsd(const ConicProgram& p, const Cones& k, const Equilibration& eq,
                    const SolverSettings& settings) {
  const int n = p.num_vars(), meq = p.num_eq();
  CoreResult res;
  const Eigen::VectorXd e = k.Identity();

  NtScaling ident;
  ident.orth = Eigen::VectorXd::Ones(k.l);
  for (int d : k.q) {
    ident.w.push_back(Eigen::MatrixXd::Identity(d, d));
    ident.winv.push_back(Eigen::MatrixXd::Identity(d, d));
  }
  KktSolver kkt;
  if (!kkt.Factor(p.a, p.g, k, ident)) {
    res.message = "initial KKT factorization failed";
    return res;
  }
  const Direction primal = kkt.Solve(Eigen::VectorXd::Zero(n), p.b, p.h);
  Eigen::VectorXd x = primal.x;
  Eigen::VectorXd s = -primal.z;
  const Direction dual = kkt.Solve(-p.c, Eigen::VectorXd::Zero(meq), Eigen::VectorXd::Zero(k.rows));
  Eigen::VectorXd y = dual.y;
  Eigen::VectorXd z = dual.z;
  {
    const double as = ConeViolation(k, s);
    if (as >= -1e-8) s += (1.0 + std::max(as, 0.0)) * e;
    const double az = ConeViolation(k, z);
    if (az >= -1e-8) z += (1.0 + std::max(az, 0.0)) * e;
  }
  double tau = 1.0, kappa = 1.0;

  const double nb = InfNorm(p.b.cwiseQuotient(eq.da));
  const double nh = InfNorm(p.h.cwiseQuotient(eq.dg));
  const double nc = eq.cscale * InfNorm(p.c.cwiseQuotient(eq.e));
  // best iterate so far, returned when the method stalls
  double best = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  auto keep_best = [&] {
    res.x = x / tau;
    res.y = y / tau;
    res.z = z / tau;
    res.s = s / tau;
  };
  auto stalled = [&](const char* why) {
    res.status = CoreStatus::kMaxIter;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s; best iterate has accuracy %.2e", why, best);
    res.message = buf;
    return res;
  };
  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    res.iterations = iter;
    const Eigen::VectorXd rx = p.a.transpose() * y + p.g.transpose() * z + tau * p.c;
    const Eigen::VectorXd ry = p.a * x - tau * p.b;
    const Eigen::VectorXd rz = s + p.g * x - tau * p.h;
    const double cx = p.c.dot(x), by = p.b.dot(y), hz = p.h.dot(z);
    const double rt = kappa + cx + by + hz;
    const double mu = (s.dot(z) + tau * kappa) / (k.degree + 1);

    const double pres = std::max(InfNorm(ry.cwiseQuotient(eq.da)) / (1.0 + nb),
                                 InfNorm(rz.cwiseQuotient(eq.dg)) / (1.0 + nh)) / tau;
    const double dres = eq.cscale * InfNorm(rx.cwiseQuotient(eq.e)) / (1.0 + nc) / tau;
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    const double gap = eq.cscale * std::max(s.dot(z) / (tau * tau), std::abs(pcost - dcost)) /
                       (1.0 + eq.cscale * std::abs(pcost));
    if (settings.verbose) {
      std::fprintf(stderr, "%3d pcost %+.6e dcost %+.6e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n",
                   iter, pcost, dcost, pres, dres, gap, tau, kappa);
    }
    if (pres < settings.tol && dres < settings.tol && gap < settings.tol) {
      res.status = CoreStatus::kOptimal;
      res.x = x / tau;
      res.y = y / tau;
      res.z = z / tau;
      res.s = s / tau;
      return res;
    }
    const double acc = std::max({pres, dres, gap});
    if (acc < best) {
      best = acc;
      best_iter = iter;
      keep_best();
    } else if (iter - best_iter >= 8 && best < 1e-3) {
      return stalled("no progress");
    }
    const double nyz = std::max({InfNorm(y), InfNorm(z), 1e-300});
    if ((by + hz) / nyz < -settings.tol &&
        InfNorm(p.a.transpose() * y + p.g.transpose() * z) / nyz < settings.tol * std::max(1.0, -(by + hz) / nyz)) {
      res.status = CoreStatus::kInfeasible;
      const double scale = -(by + hz);
      res.x = x;
      res.y = y / scale;
      res.z = z / scale;
      res.s = s;
      return res;
    }
    const double nxs = std::max({InfNorm(x), InfNorm(s), 1e-300});
    if (cx / nxs < -settings.tol &&
        std::max(InfNorm(p.a * x), InfNorm(p.g * x + s)) / nxs < settings.tol * std::max(1.0, -cx / nxs)) {
      res.status = CoreStatus::kUnbounded;
      res.x = x / -cx;
      res.s = s / -cx;
      res.y = y;
      res.z = z;
      return res;
    }
    if (iter == settings.max_iter) break;

    const NtScaling sc = ComputeScaling(k, s, z);
    if (!sc.lambda.allFinite()) {
      if (best < 1e-3) return stalled("scaling lost positivity");
      res.message = "scaling lost positivity";
      return res;
    }
    if (!kkt.Factor(p.a, p.g, k, sc)) {
      if (best < 1e-3) return stalled("KKT factorization failed");
      res.message = "KKT factorization failed";
      return res;
    }
    const Direction u1 = kkt.Solve(-p.c, p.b, p.h);
    const double den = p.c.dot(u1.x) + p.b.dot(u1.y) + p.h.dot(u1.z) - kappa / tau;

    auto step = [&](double eta, const Eigen::VectorXd& ds_rhs, double dk_rhs, Direction& d,
                    Eigen::VectorXd& ds, double& dtau, double& dkappa) {
      const Eigen::VectorXd ldiv = JordanDivide(k, sc.lambda, ds_rhs);
      const Direction u2 = kkt.Solve(-eta * rx, -eta * ry, -eta * rz - ApplyW(k, sc, ldiv, false));
      dtau = (-eta * rt - dk_rhs / tau - (p.c.dot(u2.x) + p.b.dot(u2.y) + p.h.dot(u2.z))) / den;
      d.x = u2.x + dtau * u1.x;
      d.y = u2.y + dtau * u1.y;
      d.z = u2.z + dtau * u1.z;
      ds = ApplyW(k, sc, ldiv - ApplyW(k, sc, d.z, false), false);
      dkappa = (dk_rhs - kappa * dtau) / tau;
    };
    auto max_step = [&](const Eigen::VectorXd& ds, const Direction& d, double dtau, double dkappa) {
      double a = std::min(MaxStep(k, s, ds), MaxStep(k, z, d.z));
      if (dtau < 0.0) a = std::min(a, -tau / dtau);
      if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    Direction da;
    Eigen::VectorXd ds_a;
    double dtau_a = 0.0, dkappa_a = 0.0;
    const Eigen::VectorXd ll = JordanProduct(k, sc.lambda, sc.lambda);
    step(1.0, -ll, -tau * kappa, da, ds_a, dtau_a, dkappa_a);
    const double alpha_aff = std::min(1.0, max_step(ds_a, da, dtau_a, dkappa_a));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    const Eigen::VectorXd corr =
        JordanProduct(k, ApplyW(k, sc, ds_a, true), ApplyW(k, sc, da.z, false));
    Direction d;
    Eigen::VectorXd ds;
    double dtau = 0.0, dkappa = 0.0;
    step(1.0 - sigma, -ll - corr + sigma * mu * e, -tau * kappa - dtau_a * dkappa_a + sigma * mu, d,
         ds, dtau, dkappa);
    double alpha = std::min(1.0, 0.99 * max_step(ds, d, dtau, dkappa));
    for (int back = 0; back < 30; ++back) {
      if (ConeViolation(k, s + alpha * ds) < 0.0 && ConeViolation(k, z + alpha * d.z) < 0.0) break;
      alpha *= 0.5;
    }
    if (!(alpha > 1e-12) || !d.x.allFinite()) {
      if (best < 1e-3) return stalled("step length collapsed");
      res.message = "step length collapsed";
      return res;
    }
    x += alpha * d.x;
    y += alpha * d.y;
    z += alpha * d.z;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }
  return stalled("iteration limit reached");
}

}  // namespace

ResidualReport Residuals(const ConicProgram& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  if (x.size() != p.num_vars()) Throw(ErrorCode::kInvalidArgument, "point has wrong dimension");
  const Cones k(p.num_orthant, p.soc_dims);
  ResidualReport r;
  const Eigen::VectorXd eq = p.a * x - p.b;
  r.equality = InfNorm(eq);
  const Eigen::VectorXd u = p.h - p.g * x;
  r.orthant = -std::numeric_limits<double>::infinity();
  r.soc = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k.l; ++i) r.orthant = std::max(r.orthant, -u[i]);
  for (std::size_t b = 0; b < k.q.size(); ++b) {
    const int off = k.offsets[b], d = k.q[b];
    r.soc = std::max(r.soc, u.segment(off + 1, d - 1).norm() - u[off]);
  }
  if (k.l == 0) r.orthant = 0.0;
  if (k.q.empty()) r.soc = 0.0;
  r.objective = p.c.dot(x) + p.objective_offset;
  const double scale = 1.0 + std::max(InfNorm(p.b), InfNorm(p.h));
  r.scaled_primal = std::max({r.equality, r.orthant, r.soc, 0.0}) / scale;
  if (y.size() == p.num_eq() && z.size() == p.num_ineq()) {
    r.dual_objective = -p.b.dot(y) - p.h.dot(z) + p.objective_offset;
    r.gap = r.objective - r.dual_objective;
    r.dual_residual = InfNorm(p.a.transpose() * y + p.g.transpose() * z + p.c);
    r.dual_cone = std::max(ConeViolation(k, z), 0.0);
    r.scaled_gap = std::abs(r.gap) / (1.0 + std::abs(r.objective));
  }
  return r;
}

ConicSolution Solve(const ConicProgram& program, const SolverSettings& settings) {
  program.Validate();
  ConicSolution out;
  Presolved pre = Presolve(program);
  const int n = program.num_vars();
  if (pre.inconsistent) {
    out.status = SolveStatus::kInfeasible;
    out.x = pre.fixed_value;
    out.message = "conflicting fixed-variable equalities";
    out.residuals = Residuals(program, out.x);
    return out;
  }
  const Cones cones(program.num_orthant, program.soc_dims);

  if (pre.kept.empty()) {
    out.x = pre.fixed_value;
    out.residuals = Residuals(program, out.x);
    const bool feasible = out.residuals.scaled_primal <= settings.tol;
    out.status = feasible ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    out.y = Eigen::VectorXd::Zero(program.num_eq());
    out.z = Eigen::VectorXd::Zero(program.num_ineq());
    out.s = program.h - program.g * out.x;
    out.message = "all variables fixed by equalities";
    return out;
  }

  ConicProgram scaled = pre.reduced;
  const Equilibration eq = Equilibrate(scaled, cones);
  CoreResult core = SolveHsd(scaled, cones, eq, settings);
  out.iterations = core.iterations;
  out.message = core.message;
  switch (core.status) {
    case CoreStatus::kOptimal: out.status = SolveStatus::kOptimal; break;
    case CoreStatus::kInfeasible: out.status = SolveStatus::kInfeasible; break;
    case CoreStatus::kUnbounded: out.status = SolveStatus::kUnbounded; break;
    case CoreStatus::kMaxIter: out.status = SolveStatus::kMaxIter; break;
    case CoreStatus::kNumerical: out.status = SolveStatus::kNumericalFailure; break;
  }
  if (core.x.size() == 0) {
    out.x = pre.fixed_value;
    out.residuals = Residuals(program, out.x);
    return out;
  }

  // Undo equilibration (x = E x', s = Dg^-1 s', y = cscale Da y', z = cscale Dg z').
  const Eigen::VectorXd xr = eq.e.cwiseProduct(core.x);
  out.s = core.s.cwiseQuotient(eq.dg);
  const double dual_scale = out.status == SolveStatus::kInfeasible ? 1.0 : eq.cscale;
  Eigen::VectorXd yr = dual_scale * eq.da.cwiseProduct(core.y);
  out.z = dual_scale * eq.dg.cwiseProduct(core.z);
  if (out.status == SolveStatus::kInfeasible) {
    // Normalize the certificate to b'y + h'z = -1 in original units.
    const double bh = pre.reduced.b.dot(yr) + pre.reduced.h.dot(out.z);
    if (bh < 0.0) {
      yr /= -bh;
      out.z /= -bh;
    }
  }

  // Undo presolve.
  out.x = pre.fixed_value;
  for (std::size_t j = 0; j < pre.kept.size(); ++j) out.x[pre.kept[j]] = xr[j];
  out.y = Eigen::VectorXd::Zero(program.num_eq());
  for (std::size_t r = 0; r < pre.kept_rows.size(); ++r) out.y[pre.kept_rows[r]] = yr[r];
  {
    // Multipliers of fixing rows from stationarity in each fixed column.
    const Eigen::VectorXd grad = (out.status == SolveStatus::kOptimal || out.status == SolveStatus::kMaxIter ? program.c : Eigen::VectorXd::Zero(n)) +
                                 program.a.transpose() * out.y + program.g.transpose() * out.z;
    const SparseMatrix at = SparseMatrix(program.a.transpose());
    for (int j = 0; j < n; ++j) {
      const int r = pre.fixing_row[j];
      if (r < 0) continue;
      double coef = 0.0;
      for (SparseMatrix::InnerIterator it(at, r); it; ++it) {
        if (it.row() == j) coef = it.value();
      }
      if (coef != 0.0) out.y[r] = -grad[j] / coef;
    }
  }
  out.residuals = Residuals(program, out.x, out.y, out.z);
  return out;
}

}  // namespace npb
