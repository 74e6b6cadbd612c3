/**
 * @file update.hpp
 * @brief Exact implicit proximal update via lower-level active-set
 *        enumeration.
 *
 * For one grid weight w the update solves
 *   min  ½‖θ - θ_t‖² + η‖y - x‖²   s.t. θ ∈ Θ,  x ∈ S(w, θ).
 * For each candidate active set of the lower-level constraints the KKT
 * system makes (x, u) an affine function of θ, the primal/dual validity
 * conditions become linear inequalities in θ, and the upper objective
 * becomes a strictly convex quadratic. Each such branch is a small box-
 * and-halfspace-constrained QP, solved exactly by active-set enumeration;
 * the best feasible branch wins.
 *
 * With a positive definite scalarized Hessian the branch maps come from a
 * Schur complement of precomputed blocks, and active sets with dependent
 * rows prune their whole enumeration subtree. Three exact prunings keep
 * the search fast: dependent-row subtrees, rows whose minimum over the box
 * already exceeds their bound (empty region), and branches whose
 * unconstrained minimum cannot beat the incumbent.
 */

#pragma once

#include <limits>
#include <vector>

#include "imop/loss.hpp"
#include "imop/model.hpp"
#include "imop/parallel.hpp"
#include "imop/qp.hpp"
#include "imop/scalarize.hpp"

namespace imop {

struct UpdateResult {
  Vector theta_next;
  int k_used = -1;
  double objective_value = 0.0;  // ½‖θ-θ_t‖² + η‖y-x‖² at the solution
  Vector x_at_solution;
  std::vector<int> active_set_used;  // lower-level certificate
  int skipped_degenerate = 0;        // singular lower-level KKT systems
};

namespace detail {

struct AffineInTheta {
  Vector c0;
  Matrix lin;  // value(theta) = c0 + lin * theta
};

/// Lower-level problem data with the theta-dependence split out:
///   min ½xᵀP x + r(θ)ᵀx  s.t.  G x <= h(θ)
struct ParametricLower {
  Matrix P;
  AffineInTheta r;
  Matrix G;
  AffineInTheta h;
};

inline ParametricLower build_parametric_lower(const MopInstance& inst,
                                              const Vector& w) {
  const ParamSpec& spec = *inst.param;
  const Index d = spec.dim();
  const int m = inst.num_rows();
  ParametricLower low;
  low.P = scalarized_hessian(inst, w);
  low.G = inst.ineq_matrix();
  if (spec.block == ParamBlock::ObjectiveLinear) {
    // c(w; θ) = Σ_l w_l (base + map θ)_l  — affine in θ.
    low.r.c0 = Vector::Zero(inst.n);
    low.r.lin = Matrix::Zero(inst.n, d);
    for (int l = 0; l < inst.p; ++l) {
      low.r.c0 += w[l] * spec.base.segment(static_cast<Index>(l) * inst.n, inst.n);
      low.r.lin +=
          w[l] * spec.map.middleRows(static_cast<Index>(l) * inst.n, inst.n);
    }
    low.h.c0 = inst.ineq_rhs();
    low.h.lin = Matrix::Zero(m, d);
  } else {
    low.r.c0 = scalarized_linear(inst, w);
    low.r.lin = Matrix::Zero(inst.n, d);
    low.h.c0 = Vector::Zero(m);
    low.h.c0.head(inst.q) = spec.base;
    low.h.lin = Matrix::Zero(m, d);
    low.h.lin.topRows(inst.q) = spec.map;
  }
  return low;
}

/// Smallest value of aᵀθ over the box.
inline double row_min_over_box(const Eigen::RowVectorXd& a, const Vector& lo,
                               const Vector& hi) {
  double v = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    v += a[i] > 0.0 ? a[i] * lo[i] : a[i] * hi[i];
  }
  return v;
}

/// Affine solution maps of one active set: x(θ) = x0 + X θ on the primal
/// side and u(θ) = u0 + U θ on the active multipliers.
struct BranchMaps {
  Vector x0;
  Matrix X;
  Vector u0;
  Matrix U;
  // Slack maps h(θ) - G x(θ) for every row (active rows evaluate to 0).
  Vector slack0;
  Matrix slackL;
};

/// Shared per-weight blocks for the Schur-complement construction,
/// requiring P positive definite.
struct SchurBlocks {
  bool ok = false;
  Matrix PiG;    // P⁻¹ Gᵀ            (n x m)
  Matrix GPiG;   // G P⁻¹ Gᵀ          (m x m)
  Vector pr0;    // P⁻¹ r.c0          (n)
  Matrix prL;    // P⁻¹ r.lin         (n x d)
  Vector Gpr0;   // G pr0             (m)
  Matrix GprL;   // G prL             (m x d)
};

inline SchurBlocks build_schur_blocks(const ParametricLower& low) {
  SchurBlocks s;
  Eigen::LLT<Matrix> llt(low.P);
  if (llt.info() != Eigen::Success) return s;
  // Guard against semidefinite matrices that slip through LLT.
  Eigen::SelfAdjointEigenSolver<Matrix> es(low.P, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-10) return s;
  s.PiG = llt.solve(low.G.transpose());
  s.GPiG = low.G * s.PiG;
  s.pr0 = llt.solve(low.r.c0);
  s.prL = llt.solve(low.r.lin);
  s.Gpr0 = low.G * s.pr0;
  s.GprL = low.G * s.prL;
  s.ok = true;
  return s;
}

/// Maps for an active set via the Schur complement G_S P⁻¹ G_Sᵀ. Returns
/// false when the active rows are linearly dependent (then every superset
/// is dependent as well).
inline bool branch_maps_schur(const SchurBlocks& blk, const ParametricLower& low,
                              const std::vector<int>& act, BranchMaps& out) {
  const Index s = static_cast<Index>(act.size());
  const Index d = low.h.lin.cols();
  const Index n = low.P.rows();
  if (s == 0) {
    out.x0 = -blk.pr0;
    out.X = -blk.prL;
    out.u0.resize(0);
    out.U.resize(0, d);
    out.slack0 = low.h.c0 - low.G * out.x0;
    out.slackL = low.h.lin - low.G * out.X;
    return true;
  }
  Matrix A(s, s);
  Vector rhs0(s);
  Matrix rhsL(s, d);
  for (Index i = 0; i < s; ++i) {
    const int ri = act[static_cast<std::size_t>(i)];
    for (Index j = 0; j < s; ++j) {
      A(i, j) = blk.GPiG(ri, act[static_cast<std::size_t>(j)]);
    }
    rhs0[i] = -blk.Gpr0[ri] - low.h.c0[ri];
    rhsL.row(i) = -blk.GprL.row(ri) - low.h.lin.row(ri);
  }
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) return false;
  const Vector u0 = llt.solve(rhs0);
  const Matrix U = llt.solve(rhsL);
  // Residual check: LLT of a singular PSD matrix can succeed numerically.
  if ((A * u0 - rhs0).cwiseAbs().maxCoeff() >
      1e-8 * (1.0 + rhs0.cwiseAbs().maxCoeff())) {
    return false;
  }
  out.u0 = u0;
  out.U = U;
  Matrix PiGs(n, s);
  for (Index j = 0; j < s; ++j) {
    PiGs.col(j) = blk.PiG.col(act[static_cast<std::size_t>(j)]);
  }
  out.x0 = -blk.pr0 - PiGs * u0;
  out.X = -blk.prL - PiGs * U;
  out.slack0 = low.h.c0 - low.G * out.x0;
  out.slackL = low.h.lin - low.G * out.X;
  return true;
}

/// Fallback maps through the full KKT system (handles semidefinite P for
/// active sets whose reduced Hessian is definite). Returns false when the
/// KKT matrix is singular.
inline bool branch_maps_kkt(const ParametricLower& low,
                            const std::vector<int>& act, BranchMaps& out) {
  const Index n = low.P.rows();
  const Index s = static_cast<Index>(act.size());
  const Index d = low.h.lin.cols();
  const Index dim = n + s;
  Matrix kkt = Matrix::Zero(dim, dim);
  kkt.topLeftCorner(n, n) = low.P;
  for (Index i = 0; i < s; ++i) {
    const int row = act[static_cast<std::size_t>(i)];
    kkt.block(n + i, 0, 1, n) = low.G.row(row);
    kkt.block(0, n + i, n, 1) = low.G.row(row).transpose();
  }
  Eigen::FullPivLU<Matrix> lu(kkt);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) return false;
  Matrix rhs(dim, d + 1);
  rhs.col(0).head(n) = -low.r.c0;
  rhs.rightCols(d).topRows(n) = -low.r.lin;
  for (Index i = 0; i < s; ++i) {
    const int row = act[static_cast<std::size_t>(i)];
    rhs(n + i, 0) = low.h.c0[row];
    rhs.row(n + i).tail(d) = low.h.lin.row(row);
  }
  const Matrix sol = lu.solve(rhs);
  out.x0 = sol.col(0).head(n);
  out.X = sol.topRows(n).rightCols(d);
  out.u0 = sol.col(0).tail(s);
  out.U = sol.bottomRows(s).rightCols(d);
  out.slack0 = low.h.c0 - low.G * out.x0;
  out.slackL = low.h.lin - low.G * out.X;
  return true;
}

}  // namespace detail

/// Exact minimizer of ½‖θ-θ_t‖² + η‖y - x‖² over θ ∈ Θ, x ∈ S(w_k, θ).
/// `warm` optionally carries the already-solved efficient point at θ_t,
/// which seeds the incumbent (staying put is always feasible).
inline UpdateResult solve_update_fixed_k(const MopInstance& inst,
                                         const Vector& theta_t,
                                         const Observation& y, double eta,
                                         const Vector& w, int k_index = 0,
                                         const EfficientPoint* warm = nullptr) {
  if (!(eta > 0.0)) throw InvalidParameter("learning rate must be positive");
  if (!inst.param.has_value()) {
    throw InvalidParameter("instance has no learnable block");
  }
  const ParamSpec& spec = *inst.param;
  if (!spec.contains(theta_t)) {
    throw OutOfHypothesisSet("theta_t outside the hypothesis box");
  }

  // Incumbent: stay at θ_t with its efficient point.
  EfficientPoint at_t;
  if (warm != nullptr) {
    at_t = *warm;
  } else {
    at_t = solve_pws(substitute(inst, theta_t), w);
  }
  UpdateResult best;
  best.theta_next = theta_t;
  best.k_used = k_index;
  best.x_at_solution = at_t.x;
  best.active_set_used = at_t.active;
  best.objective_value = eta * (y.y - at_t.x).squaredNorm();
  if (best.objective_value < eta * kZeroLossTol) {
    return best;  // zero loss: θ_t is already a global minimizer
  }

  const detail::ParametricLower low = detail::build_parametric_lower(inst, w);
  const detail::SchurBlocks blocks = detail::build_schur_blocks(low);
  const Index d = spec.dim();
  const int n = inst.n;
  const int m = inst.num_rows();
  const double tol = 1e-8;

  // Deferred branches: the unconstrained optimum was infeasible, so the
  // exact value needs a constrained solve. Resolved best-bound-first.
  struct Deferred {
    double bound;
    long order;
    std::vector<int> act;
    Vector x0;
    Matrix X;
    Matrix C;  // non-redundant region rows plus box rows
    Vector dd;
    Matrix H;
    Vector g;
  };
  std::vector<Deferred> deferred;
  long branch_order = 0;

  detail::BranchMaps maps;
  std::vector<int> act;
  act.reserve(static_cast<std::size_t>(n));

  const auto process_branch = [&]() {
    ++branch_order;
    const Index s = static_cast<Index>(act.size());
    // Region polyhedron in θ: inactive slack rows and multiplier signs.
    // Rows that can never be tight over the box are dropped; a row whose
    // minimum over the box exceeds its bound proves the region empty.
    Matrix C(m + 2 * static_cast<int>(d), d);
    Vector dd(m + 2 * static_cast<int>(d));
    int r = 0;
    const auto add_row = [&](const Eigen::RowVectorXd& a, double bound) {
      double lo_val = 0.0, hi_val = 0.0;
      for (Index i = 0; i < d; ++i) {
        if (a[i] > 0.0) {
          lo_val += a[i] * spec.lower[i];
          hi_val += a[i] * spec.upper[i];
        } else {
          lo_val += a[i] * spec.upper[i];
          hi_val += a[i] * spec.lower[i];
        }
      }
      if (lo_val > bound + tol) return false;  // region empty
      if (hi_val > bound - 1e-12) {            // can be tight: keep
        C.row(r) = a;
        dd[r] = bound;
        ++r;
      }
      return true;
    };
    std::vector<bool> in_set(static_cast<std::size_t>(m), false);
    for (const int row : act) in_set[static_cast<std::size_t>(row)] = true;
    for (int row = 0; row < m; ++row) {
      if (in_set[static_cast<std::size_t>(row)]) continue;
      if (!add_row(-maps.slackL.row(row), maps.slack0[row])) return;
    }
    for (Index i = 0; i < s; ++i) {
      if (!add_row(-maps.U.row(i), maps.u0[i])) return;
    }

    // Upper objective ½‖θ-θ_t‖² + η‖y - x(θ)‖², strictly convex.
    const Vector resid0 = y.y - maps.x0;
    Matrix H = 2.0 * eta * (maps.X.transpose() * maps.X);
    H.diagonal().array() += 1.0;
    const Vector g = theta_t + 2.0 * eta * (maps.X.transpose() * resid0);
    const auto objective_at = [&](const Vector& th) {
      return 0.5 * (th - theta_t).squaredNorm() +
             eta * (y.y - (maps.x0 + maps.X * th)).squaredNorm();
    };

    Eigen::LLT<Matrix> hllt(H);
    const Vector theta_u = hllt.solve(g);
    const double bound = objective_at(theta_u);
    if (bound >= best.objective_value - 1e-12) {
      return;  // this branch cannot beat the incumbent
    }
    const bool box_ok = spec.contains(theta_u, tol);
    if (box_ok && (r == 0 || (C.topRows(r) * theta_u - dd.head(r)).maxCoeff() <= tol)) {
      best.objective_value = bound;
      best.theta_next = spec.clamp(theta_u);
      best.x_at_solution = maps.x0 + maps.X * theta_u;
      best.active_set_used = act;
      return;
    }
    // Append box rows and defer the constrained solve.
    for (Index i = 0; i < d; ++i) {
      C.row(r).setZero();
      C(r, i) = 1.0;
      dd[r] = spec.upper[i];
      ++r;
      C.row(r).setZero();
      C(r, i) = -1.0;
      dd[r] = -spec.lower[i];
      ++r;
    }
    deferred.push_back(Deferred{bound, branch_order, act, maps.x0, maps.X,
                                C.topRows(r), dd.head(r), H, g});
  };

  if (blocks.ok) {
    // DFS over active sets; a dependent row set prunes its whole subtree.
    const auto dfs = [&](auto&& self, int next_row) -> void {
      if (!detail::branch_maps_schur(blocks, low, act, maps)) {
        ++best.skipped_degenerate;
        return;
      }
      process_branch();
      if (static_cast<int>(act.size()) == n) return;
      for (int row = next_row; row < m; ++row) {
        act.push_back(row);
        self(self, row + 1);
        act.pop_back();
      }
    };
    dfs(dfs, 0);
  } else {
    // Semidefinite Hessian: enumerate flat, full KKT per active set.
    for (int size = 0; size <= std::min(n, m); ++size) {
      act.assign(static_cast<std::size_t>(size), 0);
      for (int i = 0; i < size; ++i) act[static_cast<std::size_t>(i)] = i;
      bool more = true;
      while (more) {
        if (detail::branch_maps_kkt(low, act, maps)) {
          process_branch();
        } else {
          ++best.skipped_degenerate;
        }
        more = size > 0 && detail::next_combination(act, m);
        if (size == 0) break;
      }
    }
  }

  std::sort(deferred.begin(), deferred.end(),
            [](const Deferred& a, const Deferred& b) {
              return a.bound != b.bound ? a.bound < b.bound : a.order < b.order;
            });
  for (const auto& br : deferred) {
    if (br.bound >= best.objective_value - 1e-12) continue;
    QpProblem sub;
    sub.H = br.H;
    sub.c = -br.g;
    sub.C = br.C;
    sub.d = br.dd;
    const QpResult qr = solve_qp_enumerate(sub);
    if (!qr.solved) continue;  // empty region
    const double val = 0.5 * (qr.x - theta_t).squaredNorm() +
                       eta * (y.y - (br.x0 + br.X * qr.x)).squaredNorm();
    if (val < best.objective_value - 1e-12) {
      best.objective_value = val;
      best.theta_next = spec.clamp(qr.x);
      best.x_at_solution = br.x0 + br.X * qr.x;
      best.active_set_used = br.act;
    }
  }
  return best;
}

/// Full implicit update: best fixed-k solve over the entire grid (ties to
/// the smallest index). The K solves run in parallel when workers > 1.
inline UpdateResult algorithm1_update(
    const MopInstance& inst, const Vector& theta_t, const Observation& y,
    double eta, const WeightGrid& grid, int workers = 1,
    const std::vector<EfficientPoint>* points_at_t = nullptr) {
  std::vector<EfficientPoint> local;
  if (points_at_t == nullptr) {
    local = sampled_efficient_points(substitute(inst, theta_t), grid);
    points_at_t = &local;
  }
  const LossResult loss = nearest_sampled_point(*points_at_t, y.y);
  if (loss.value < kZeroLossTol) {
    UpdateResult res;
    res.theta_next = theta_t;
    res.k_used = loss.k_star;
    res.objective_value = eta * loss.value;
    res.x_at_solution = loss.x_star;
    res.active_set_used =
        (*points_at_t)[static_cast<std::size_t>(loss.k_star)].active;
    return res;
  }
  std::vector<UpdateResult> results(static_cast<std::size_t>(grid.size()));
  parallel_for(static_cast<std::size_t>(grid.size()), workers, [&](std::size_t k) {
    results[k] = solve_update_fixed_k(
        inst, theta_t, y, eta, grid[static_cast<int>(k)], static_cast<int>(k),
        &(*points_at_t)[k]);
  });
  int best = 0;
  for (int k = 1; k < grid.size(); ++k) {
    if (results[static_cast<std::size_t>(k)].objective_value <
        results[static_cast<std::size_t>(best)].objective_value) {
      best = k;
    }
  }
  return results[static_cast<std::size_t>(best)];
}

/// Accelerated update: pick k* nearest to y at θ_t, then solve only that
/// subproblem.
inline UpdateResult algorithm2_update(
    const MopInstance& inst, const Vector& theta_t, const Observation& y,
    double eta, const WeightGrid& grid,
    const std::vector<EfficientPoint>* points_at_t = nullptr) {
  std::vector<EfficientPoint> local;
  if (points_at_t == nullptr) {
    local = sampled_efficient_points(substitute(inst, theta_t), grid);
    points_at_t = &local;
  }
  const LossResult loss = nearest_sampled_point(*points_at_t, y.y);
  if (loss.value < kZeroLossTol) {
    UpdateResult res;
    res.theta_next = theta_t;
    res.k_used = loss.k_star;
    res.objective_value = eta * loss.value;
    res.x_at_solution = loss.x_star;
    res.active_set_used =
        (*points_at_t)[static_cast<std::size_t>(loss.k_star)].active;
    return res;
  }
  return solve_update_fixed_k(inst, theta_t, y, eta, grid[loss.k_star],
                              loss.k_star,
                              &(*points_at_t)[static_cast<std::size_t>(loss.k_star)]);
}

}  // namespace imop
