/**
 * @file qp.hpp
 * @brief Exact convex QP solving by enumeration of active sets.
 *
 * Solves  min ½ xᵀH x + cᵀx  s.t.  C x ≤ d  by treating subsets of the
 * inequality rows as equalities, solving the equality-constrained KKT
 * system, and accepting a candidate iff the inactive rows are primal
 * feasible and the multipliers are nonnegative (within tolerance). For a
 * convex objective any accepted candidate is a global minimizer, and for a
 * positive definite Hessian it is the unique one, so enumeration may stop
 * at the first certified point.
 *
 * Subsets are visited by increasing size, lexicographically within a size.
 * Singular KKT systems (rank-deficient active rows, or a Hessian that is
 * not definite on the active nullspace) are skipped and counted.
 */

#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "imop/types.hpp"

namespace imop {

struct QpProblem {
  Matrix H;  // n x n, symmetric positive semidefinite
  Vector c;  // n
  Matrix C;  // m x n
  Vector d;  // m
};

struct QpResult {
  bool solved = false;
  Vector x;
  Vector mult;              // length m, zero on inactive rows
  std::vector<int> active;  // ascending row indices
  double value = std::numeric_limits<double>::infinity();
  int skipped_singular = 0;
  bool unique_minimizer = true;  // meaningful in verify mode only
};

struct QpOptions {
  const std::vector<int>* hint = nullptr;  // active set to try first
  bool early_exit = true;   // stop at first certified point (PD Hessians)
  bool verify_all = false;  // visit every subset, compare accepted minimizers
  double tol = 1e-8;
  double distinct_tol = 1e-8;  // minimizer comparison in verify mode
};

namespace detail {

/// Advances `comb` to the next size-k combination of {0..m-1} in
/// lexicographic order. Returns false when exhausted.
inline bool next_combination(std::vector<int>& comb, int m) {
  const int k = static_cast<int>(comb.size());
  for (int i = k - 1; i >= 0; --i) {
    if (comb[i] < m - k + i) {
      ++comb[i];
      for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

/// Solves the KKT system for the given active rows. Returns false when the
/// system is singular.
inline bool solve_kkt(const QpProblem& qp, const std::vector<int>& act,
                      Vector& x, Vector& u_act) {
  const Index n = qp.H.rows();
  const Index s = static_cast<Index>(act.size());
  Matrix kkt = Matrix::Zero(n + s, n + s);
  kkt.topLeftCorner(n, n) = qp.H;
  for (Index i = 0; i < s; ++i) {
    kkt.block(n + i, 0, 1, n) = qp.C.row(act[static_cast<std::size_t>(i)]);
    kkt.block(0, n + i, n, 1) =
        qp.C.row(act[static_cast<std::size_t>(i)]).transpose();
  }
  Vector rhs(n + s);
  rhs.head(n) = -qp.c;
  for (Index i = 0; i < s; ++i) {
    rhs[n + i] = qp.d[act[static_cast<std::size_t>(i)]];
  }
  Eigen::FullPivLU<Matrix> lu(kkt);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) return false;
  const Vector sol = lu.solve(rhs);
  x = sol.head(n);
  u_act = sol.tail(s);
  return true;
}

/// Full primal feasibility and multiplier-sign check.
inline bool certify(const QpProblem& qp, const Vector& x, const Vector& u_act,
                    double tol) {
  if (u_act.size() > 0 && u_act.minCoeff() < -tol) return false;
  if (qp.C.rows() > 0) {
    const Vector slack = qp.d - qp.C * x;
    if (slack.minCoeff() < -tol) return false;
  }
  return true;
}

}  // namespace detail

inline double qp_objective(const QpProblem& qp, const Vector& x) {
  return 0.5 * x.dot(qp.H * x) + qp.c.dot(x);
}

inline QpResult solve_qp_enumerate(const QpProblem& qp,
                                   const QpOptions& opt = {}) {
  const Index n = qp.H.rows();
  const int m = static_cast<int>(qp.C.rows());
  const int max_size = std::min<int>(static_cast<int>(n), m);
  QpResult res;
  res.mult = Vector::Zero(m);

  Vector x, u_act;
  auto accept = [&](const std::vector<int>& act) -> bool {
    res.x = x;
    res.mult.setZero();
    for (std::size_t i = 0; i < act.size(); ++i) {
      res.mult[act[i]] = u_act[static_cast<Index>(i)];
    }
    res.active = act;
    res.value = qp_objective(qp, res.x);
    res.solved = true;
    return true;
  };

  if (opt.hint != nullptr && !opt.verify_all) {
    const std::vector<int>& act = *opt.hint;
    const bool in_range =
        std::all_of(act.begin(), act.end(),
                    [&](int r) { return r >= 0 && r < m; }) &&
        std::is_sorted(act.begin(), act.end()) &&
        static_cast<int>(act.size()) <= max_size;
    const auto try_set = [&](const std::vector<int>& cand) {
      if (detail::solve_kkt(qp, cand, x, u_act) &&
          detail::certify(qp, x, u_act, opt.tol)) {
        accept(cand);
        return true;
      }
      return false;
    };
    if (in_range) {
      bool found = try_set(act);
      // Warm starts drift by single rows; probe removals, additions and
      // swaps around the hint before falling back to full enumeration.
      if (!found) {
        std::vector<int> cand;
        for (std::size_t i = 0; i < act.size() && !found; ++i) {
          cand = act;
          cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
          found = try_set(cand);
        }
        if (!found && static_cast<int>(act.size()) < max_size) {
          for (int row = 0; row < m && !found; ++row) {
            if (std::binary_search(act.begin(), act.end(), row)) continue;
            cand = act;
            cand.insert(std::lower_bound(cand.begin(), cand.end(), row), row);
            found = try_set(cand);
          }
        }
        if (!found) {
          for (std::size_t i = 0; i < act.size() && !found; ++i) {
            for (int row = 0; row < m && !found; ++row) {
              if (std::binary_search(act.begin(), act.end(), row)) continue;
              cand = act;
              cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
              cand.insert(std::lower_bound(cand.begin(), cand.end(), row), row);
              found = try_set(cand);
            }
          }
        }
      }
      if (found && opt.early_exit) return res;
    }
  }

  for (int k = 0; k <= max_size; ++k) {
    std::vector<int> comb(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
    bool more = true;
    while (more) {
      if (!detail::solve_kkt(qp, comb, x, u_act)) {
        ++res.skipped_singular;
      } else if (detail::certify(qp, x, u_act, opt.tol)) {
        if (!res.solved) {
          accept(comb);
          if (opt.early_exit && !opt.verify_all) return res;
        } else if (opt.verify_all &&
                   (x - res.x).norm() > opt.distinct_tol) {
          res.unique_minimizer = false;
        }
      }
      more = k > 0 && detail::next_combination(comb, m);
      if (k == 0) break;
    }
  }
  return res;
}

}  // namespace imop
