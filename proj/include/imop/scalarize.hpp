/**
 * @file scalarize.hpp
 * @brief Simplex weight grids and the exact weighted-sum solver.
 *
 * A weight w on the probability simplex scalarizes the instance into
 *   min ½ xᵀQ(w)x + c(w)ᵀx,  Q(w) = Σ w_l Q_l,  c(w) = Σ w_l c_l
 * over the polyhedron. solve_pws solves this exactly by active-set
 * enumeration and returns the minimizer with its certificate.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "imop/errors.hpp"
#include "imop/model.hpp"
#include "imop/qp.hpp"
#include "imop/rng.hpp"

namespace imop {

/// Offset from the simplex boundary used by interior grids; weights with
/// min coordinate >= this are flagged strictly positive.
inline constexpr double kInteriorOffset = 1e-3;

struct WeightVector {
  Vector w;
  bool strictly_positive = false;

  explicit WeightVector(Vector values) : w(std::move(values)) {
    if (w.size() < 2) throw UnsupportedDimension("weight needs p >= 2");
    if (w.minCoeff() < 0.0) throw InvalidParameter("negative weight");
    if (std::abs(w.sum() - 1.0) > 1e-12) {
      throw InvalidParameter("weights must sum to one");
    }
    strictly_positive = w.minCoeff() >= kInteriorOffset;
  }
};

struct WeightGrid {
  std::vector<WeightVector> weights;
  double interior_offset = 0.0;  // nonzero for interior grids

  int size() const { return static_cast<int>(weights.size()); }
  const Vector& operator[](int k) const {
    return weights[static_cast<std::size_t>(k)].w;
  }
};

/// Evenly spaced two-objective grid: w_k = (u_k, 1 - u_k) with u_k on
/// [0, 1], or on [offset, 1 - offset] when interior is requested.
inline WeightGrid even_grid(int p, int K, bool interior = false) {
  if (p != 2) {
    throw UnsupportedDimension("even grid only supports p = 2; use "
                               "sample_uniform_simplex for larger p");
  }
  if (K < 2) throw InvalidParameter("grid needs K >= 2");
  const double lo = interior ? kInteriorOffset : 0.0;
  const double hi = 1.0 - lo;
  WeightGrid grid;
  grid.interior_offset = interior ? kInteriorOffset : 0.0;
  grid.weights.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const double u = lo + (hi - lo) * static_cast<double>(k) / (K - 1);
    Vector w(2);
    w << u, 1.0 - u;
    grid.weights.emplace_back(std::move(w));
  }
  return grid;
}

/// K weights drawn uniformly from the p-simplex via sorted uniform
/// spacings. Deterministic under the seed.
inline WeightGrid sample_uniform_simplex(int p, int K, std::uint64_t seed) {
  if (p < 2) throw UnsupportedDimension("need p >= 2");
  if (K < 2) throw InvalidParameter("grid needs K >= 2");
  Rng rng(seed);
  WeightGrid grid;
  grid.weights.reserve(static_cast<std::size_t>(K));
  std::vector<double> cuts(static_cast<std::size_t>(p) + 1);
  while (grid.size() < K) {
    cuts.front() = 0.0;
    cuts.back() = 1.0;
    for (int i = 1; i < p; ++i) cuts[static_cast<std::size_t>(i)] = rng.uniform01();
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    Vector w(p);
    for (int i = 0; i < p; ++i) {
      w[i] = cuts[static_cast<std::size_t>(i) + 1] - cuts[static_cast<std::size_t>(i)];
    }
    const bool duplicate = std::any_of(
        grid.weights.begin(), grid.weights.end(),
        [&](const WeightVector& v) { return (v.w - w).norm() < 1e-15; });
    if (!duplicate) grid.weights.emplace_back(std::move(w));
  }
  return grid;
}

/// T two-objective weights whose first coordinate follows a normal
/// distribution truncated to [0, 1]. Deterministic under the seed.
inline std::vector<WeightVector> sample_truncated_normal_weights(
    int T, double mean, double sd, std::uint64_t seed) {
  if (T < 1) throw InvalidParameter("need T >= 1");
  if (!(mean > 0.0 && mean < 1.0)) {
    throw InvalidParameter("mean must lie strictly inside (0, 1)");
  }
  if (!(sd > 0.0)) throw InvalidParameter("sd must be positive");
  Rng rng(seed);
  std::vector<WeightVector> out;
  out.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double u = rng.truncated_normal(mean, sd, 0.0, 1.0);
    Vector w(2);
    w << u, 1.0 - u;
    out.emplace_back(std::move(w));
  }
  return out;
}

/// Minimizer of the scalarized problem plus its KKT certificate. The
/// multiplier vector covers the stacked rows [A; -I].
struct EfficientPoint {
  Vector x;
  std::vector<int> active;
  Vector mult;
  double value = 0.0;
};

struct PwsOptions {
  const std::vector<int>* hint = nullptr;
  /// Permit a positive semidefinite (possibly zero) scalarized Hessian.
  /// The solve then enumerates every active set and requires the accepted
  /// minimizers to coincide; genuinely flat optimal faces are rejected.
  bool allow_linear_fallback = false;
  /// Enumerate everything even for definite Hessians and cross-check that
  /// all accepted candidates agree (used by property tests).
  bool verify_unique = false;
};

inline Matrix scalarized_hessian(const MopInstance& inst, const Vector& w) {
  Matrix Qw = Matrix::Zero(inst.n, inst.n);
  for (int l = 0; l < inst.p; ++l) Qw += w[l] * inst.Q[static_cast<std::size_t>(l)];
  return Qw;
}

inline Vector scalarized_linear(const MopInstance& inst, const Vector& w) {
  Vector cw = Vector::Zero(inst.n);
  for (int l = 0; l < inst.p; ++l) cw += w[l] * inst.c[static_cast<std::size_t>(l)];
  return cw;
}

/// Exact solve of the weighted-sum problem over {Ax <= b, x >= 0}.
inline EfficientPoint solve_pws(const MopInstance& inst, const Vector& w,
                                const PwsOptions& opt = {}) {
  if (w.size() != inst.p) throw DimensionMismatch("weight has wrong length");
  QpProblem qp;
  qp.H = scalarized_hessian(inst, w);
  qp.c = scalarized_linear(inst, w);
  qp.C = inst.ineq_matrix();
  qp.d = inst.ineq_rhs();

  Eigen::SelfAdjointEigenSolver<Matrix> es(qp.H, Eigen::EigenvaluesOnly);
  const bool definite = es.eigenvalues().minCoeff() > 1e-10;
  if (!definite && !opt.allow_linear_fallback) {
    throw NoKktPoint("scalarized Hessian is not positive definite and the "
                     "linear fallback is disabled");
  }

  QpOptions qopt;
  qopt.hint = opt.hint;
  const bool full_sweep = !definite || opt.verify_unique;
  qopt.early_exit = !full_sweep;
  qopt.verify_all = full_sweep;
  const QpResult res = solve_qp_enumerate(qp, qopt);

  if (!res.solved) {
    // Count candidate subsets to tell "all singular" apart from "none
    // certified".
    long total = 0, binom = 1;
    const int m = inst.num_rows();
    for (int k = 0; k <= std::min(inst.n, m); ++k) {
      total += binom;
      binom = binom * (m - k) / (k + 1);
    }
    if (res.skipped_singular >= total) {
      throw SingularKktSystem("every candidate active set was singular");
    }
    throw NoKktPoint("no active set satisfied the KKT conditions");
  }
  if (full_sweep && !res.unique_minimizer) {
    throw NoKktPoint("distinct minimizers across active sets; scalarized "
                     "problem is not strongly convex");
  }
  EfficientPoint ep;
  ep.x = res.x;
  ep.active = res.active;
  ep.mult = res.mult;
  ep.value = res.value;
  return ep;
}

}  // namespace imop
