/**
 * @file model.hpp
 * @brief Parametrized multiobjective quadratic program over a polyhedron.
 *
 * An instance is
 *   min { f_1(x), ..., f_p(x) }   with  f_l(x) = ½ xᵀQ_l x + c_lᵀx
 *   s.t. A x <= b,  x >= 0
 * with every Q_l symmetric positive semidefinite and the feasible set
 * nonempty and bounded. One block of the data (the stacked linear terms
 * c_1..c_p, or the right-hand side b) may be declared learnable through a
 * ParamSpec; the learnable parameter lives in a coordinate box and maps
 * affinely into the block.
 *
 * All types are immutable after construction and safe to share across
 * threads.
 */

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "imop/errors.hpp"
#include "imop/qp.hpp"
#include "imop/rng.hpp"
#include "imop/types.hpp"

namespace imop {

// Symmetry / PSD acceptance tolerances; fixed, not configurable.
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kBoxTol = 1e-9;
// Enumerating active sets of q + n inequalities is exact but exponential;
// instances beyond this budget are rejected at construction.
inline constexpr int kActiveSetBudget = 16;

enum class ParamBlock { ObjectiveLinear, Rhs };

/// Learnable-parameter description: a box Θ = [lower, upper] in R^d plus an
/// affine embedding block_values = base + map * theta. The default embedding
/// is the identity on the full block.
struct ParamSpec {
  ParamBlock block = ParamBlock::ObjectiveLinear;
  Vector lower;
  Vector upper;
  Vector base;  // block_dim
  Matrix map;   // block_dim x d
  double euclidean_bound = 0.0;  // max ||theta|| over Θ

  Index dim() const { return lower.size(); }

  bool contains(const Vector& theta, double tol = kBoxTol) const {
    if (theta.size() != lower.size()) return false;
    for (Index i = 0; i < theta.size(); ++i) {
      if (theta[i] < lower[i] - tol || theta[i] > upper[i] + tol) return false;
    }
    return true;
  }

  Vector clamp(const Vector& theta) const {
    Vector out = theta;
    for (Index i = 0; i < out.size(); ++i) {
      out[i] = std::min(upper[i], std::max(lower[i], out[i]));
    }
    return out;
  }

  Vector block_values(const Vector& theta) const { return base + map * theta; }
};

/// One received decision. Noisy decisions may be infeasible; a radius check
/// records violations instead of rejecting.
struct Observation {
  int t = 0;
  Vector y;

  bool within_radius(double radius) const { return y.norm() <= radius; }
};

struct MopInstance {
  int p = 0;  // objectives
  int n = 0;  // decision dimension
  int q = 0;  // inequality rows of A

  std::vector<Matrix> Q;  // p matrices, n x n
  std::vector<Vector> c;  // p vectors, n
  Matrix A;               // q x n
  Vector b;               // q

  // Computed at construction.
  double bound_B = 0.0;  // max ||x|| over the feasible set
  Vector coord_lo;       // per-coordinate feasible range
  Vector coord_hi;
  bool strongly_convex = false;
  double lambda = 0.0;  // min eigenvalue over all Q_l when claimed

  std::optional<ParamSpec> param;

  int num_rows() const { return q + n; }  // rows of [A; -I]

  /// Stacked inequality system G x <= h equivalent to Ax <= b, x >= 0.
  Matrix ineq_matrix() const {
    Matrix G(q + n, n);
    G.topRows(q) = A;
    G.bottomRows(n) = -Matrix::Identity(n, n);
    return G;
  }

  Vector ineq_rhs() const {
    Vector h = Vector::Zero(q + n);
    h.head(q) = b;
    return h;
  }

  double objective(int l, const Vector& x) const {
    return 0.5 * x.dot(Q[static_cast<std::size_t>(l)] * x) +
           c[static_cast<std::size_t>(l)].dot(x);
  }

  Vector objectives(const Vector& x) const {
    Vector f(p);
    for (int l = 0; l < p; ++l) f[l] = objective(l, x);
    return f;
  }

  /// Current values of a parameter block (stacked c, or b).
  Vector block_values(ParamBlock blk) const {
    if (blk == ParamBlock::Rhs) return b;
    Vector stacked(static_cast<Index>(n) * p);
    for (int l = 0; l < p; ++l) {
      stacked.segment(static_cast<Index>(l) * n, n) =
          c[static_cast<std::size_t>(l)];
    }
    return stacked;
  }

  friend bool operator==(const MopInstance& u, const MopInstance& v) {
    if (u.p != v.p || u.n != v.n || u.q != v.q) return false;
    for (int l = 0; l < u.p; ++l) {
      if (u.Q[static_cast<std::size_t>(l)] != v.Q[static_cast<std::size_t>(l)])
        return false;
      if (u.c[static_cast<std::size_t>(l)] != v.c[static_cast<std::size_t>(l)])
        return false;
    }
    return u.A == v.A && u.b == v.b;
  }
};

/// Raw, unvalidated instance data.
struct MopRaw {
  int p = 0;
  int n = 0;
  int q = 0;
  std::vector<Matrix> Q;
  std::vector<Vector> c;
  Matrix A;
  Vector b;
  bool claim_strong_convexity = false;
};

namespace detail {

/// All feasible vertices of {Ax <= b, x >= 0}: nonsingular size-n active
/// subsets of the stacked rows. The polyhedron is a polytope iff bounded, and
/// any nonempty polytope in this form has at least one vertex.
inline std::vector<Vector> feasible_vertices(const Matrix& A, const Vector& b) {
  const int n = static_cast<int>(A.cols());
  const int q = static_cast<int>(A.rows());
  const int m = q + n;
  Matrix G(m, n);
  G.topRows(q) = A;
  G.bottomRows(n) = -Matrix::Identity(n, n);
  Vector h = Vector::Zero(m);
  h.head(q) = b;

  std::vector<Vector> verts;
  std::vector<int> comb(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) comb[static_cast<std::size_t>(i)] = i;
  bool more = true;
  while (more) {
    Matrix Gs(n, n);
    Vector hs(n);
    for (int i = 0; i < n; ++i) {
      Gs.row(i) = G.row(comb[static_cast<std::size_t>(i)]);
      hs[i] = h[comb[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<Matrix> lu(Gs);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      const Vector x = lu.solve(hs);
      if ((h - G * x).minCoeff() >= -1e-8) verts.push_back(x);
    }
    more = next_combination(comb, m);
  }
  return verts;
}

/// True iff the recession cone {d >= 0, A d <= 0} contains a nonzero ray,
/// detected via vertices of its intersection with the probability simplex.
inline bool has_recession_ray(const Matrix& A) {
  const int n = static_cast<int>(A.cols());
  const int q = static_cast<int>(A.rows());
  if (n == 1) {
    // d = 1 is the only candidate.
    return q == 0 || (A * Vector::Ones(1)).maxCoeff() <= 1e-10;
  }
  const int m = q + n;  // rows of [A; -I]
  Matrix G(m, n);
  G.topRows(q) = A;
  G.bottomRows(n) = -Matrix::Identity(n, n);
  // A vertex of {G d <= 0, 1ᵀd = 1} activates the equality plus n-1 rows.
  std::vector<int> comb(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) comb[static_cast<std::size_t>(i)] = i;
  bool more = true;
  while (more) {
    Matrix Gs(n, n);
    Vector hs = Vector::Zero(n);
    for (int i = 0; i < n - 1; ++i) {
      Gs.row(i) = G.row(comb[static_cast<std::size_t>(i)]);
    }
    Gs.row(n - 1).setOnes();
    hs[n - 1] = 1.0;
    Eigen::FullPivLU<Matrix> lu(Gs);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      const Vector dvec = lu.solve(hs);
      if ((G * dvec).maxCoeff() <= 1e-8) return true;
    }
    more = next_combination(comb, m);
  }
  return false;
}

inline void check_psd(const Matrix& Q, int l) {
  const Index n = Q.rows();
  if (Q.cols() != n) {
    throw DimensionMismatch("Q" + std::to_string(l + 1) + " is not square");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > kPsdTol) {
    throw NotPsd("Q" + std::to_string(l + 1) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw NotPsd("Q" + std::to_string(l + 1) +
                 " has negative eigenvalue " +
                 std::to_string(es.eigenvalues().minCoeff()));
  }
}

}  // namespace detail

/// Validates raw data and computes the feasible-set bound B, the
/// per-coordinate feasible ranges, and (when claimed) the strong-convexity
/// constant lambda.
inline MopInstance build_instance(const MopRaw& raw) {
  if (raw.p < 2) throw DimensionMismatch("need at least two objectives");
  if (raw.n < 1 || raw.q < 0) throw DimensionMismatch("bad dimensions");
  if (static_cast<int>(raw.Q.size()) != raw.p ||
      static_cast<int>(raw.c.size()) != raw.p) {
    throw DimensionMismatch("objective count does not match p");
  }
  if (raw.A.rows() != raw.q || raw.A.cols() != raw.n ||
      raw.b.size() != raw.q) {
    throw DimensionMismatch("constraint dimensions inconsistent");
  }
  for (int l = 0; l < raw.p; ++l) {
    const auto& Ql = raw.Q[static_cast<std::size_t>(l)];
    detail::check_psd(Ql, l);
    if (raw.c[static_cast<std::size_t>(l)].size() != raw.n) {
      throw DimensionMismatch("c" + std::to_string(l + 1) + " has wrong size");
    }
  }
  if (raw.q + raw.n > kActiveSetBudget) {
    throw InvalidParameter("instance exceeds the active-set enumeration "
                           "budget q + n <= " +
                           std::to_string(kActiveSetBudget));
  }

  MopInstance inst;
  inst.p = raw.p;
  inst.n = raw.n;
  inst.q = raw.q;
  inst.Q = raw.Q;
  inst.c = raw.c;
  inst.A = raw.A;
  inst.b = raw.b;

  if (detail::has_recession_ray(raw.A)) {
    throw UnboundedRegion("feasible set has a recession ray");
  }
  const auto verts = detail::feasible_vertices(raw.A, raw.b);
  if (verts.empty()) {
    throw InfeasibleRegion("feasible set is empty");
  }
  inst.coord_lo = Vector::Constant(raw.n, std::numeric_limits<double>::max());
  inst.coord_hi = Vector::Constant(raw.n, std::numeric_limits<double>::lowest());
  double bound = 0.0;
  for (const auto& v : verts) {
    inst.coord_lo = inst.coord_lo.cwiseMin(v);
    inst.coord_hi = inst.coord_hi.cwiseMax(v);
    bound = std::max(bound, v.norm());
  }
  inst.bound_B = bound;

  if (raw.claim_strong_convexity) {
    double lam = std::numeric_limits<double>::max();
    for (const auto& Ql : raw.Q) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(Ql, Eigen::EigenvaluesOnly);
      lam = std::min(lam, es.eigenvalues().minCoeff());
    }
    if (lam <= 0.0) {
      throw InvalidParameter("strong convexity claimed but min eigenvalue is " +
                             std::to_string(lam));
    }
    inst.strongly_convex = true;
    inst.lambda = lam;
  }
  return inst;
}

/// Validates a parameter box against an instance and attaches it. For blocks
/// that move the feasible region, every corner of Θ must keep it nonempty.
inline MopInstance attach_param_spec(const MopInstance& inst, ParamBlock block,
                                     const Vector& lower, const Vector& upper,
                                     std::optional<Vector> base = std::nullopt,
                                     std::optional<Matrix> map = std::nullopt) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw DimensionMismatch("hypothesis box bounds have mismatched sizes");
  }
  for (Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) {
      throw InvalidParameter("hypothesis box is empty at coordinate " +
                             std::to_string(i));
    }
  }
  const Index block_dim = block == ParamBlock::Rhs
                              ? static_cast<Index>(inst.q)
                              : static_cast<Index>(inst.n) * inst.p;
  ParamSpec spec;
  spec.block = block;
  spec.lower = lower;
  spec.upper = upper;
  spec.base = base.value_or(Vector::Zero(block_dim));
  spec.map = map.value_or(Matrix::Identity(block_dim, lower.size()));
  if (spec.base.size() != block_dim || spec.map.rows() != block_dim ||
      spec.map.cols() != lower.size()) {
    throw DimensionMismatch("parameter embedding dimensions inconsistent");
  }
  Vector corner_abs = lower.cwiseAbs().cwiseMax(upper.cwiseAbs());
  spec.euclidean_bound = corner_abs.norm();

  if (block == ParamBlock::Rhs) {
    const Index d = lower.size();
    if (d > 20) {
      throw InvalidParameter("corner feasibility check limited to dim <= 20");
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      Vector corner(d);
      for (Index i = 0; i < d; ++i) {
        corner[i] = (mask >> i) & 1 ? upper[i] : lower[i];
      }
      const Vector bc = spec.block_values(corner);
      if (detail::feasible_vertices(inst.A, bc).empty()) {
        throw InfeasibleRegion(
            "hypothesis-box corner makes the feasible set empty");
      }
    }
  }

  MopInstance out = inst;
  out.param = spec;
  return out;
}

/// Returns a copy of the instance with the learnable block overwritten by
/// theta. The input instance is unchanged. Rhs substitutions revalidate the
/// feasible region and refresh B and the coordinate ranges.
inline MopInstance substitute(const MopInstance& inst, const Vector& theta) {
  if (!inst.param.has_value()) {
    throw InvalidParameter("instance has no learnable block");
  }
  const ParamSpec& spec = *inst.param;
  if (theta.size() != spec.dim()) {
    throw DimensionMismatch("theta has wrong dimension");
  }
  if (!spec.contains(theta)) {
    throw OutOfHypothesisSet("theta outside the hypothesis box");
  }
  MopInstance out = inst;
  const Vector vals = spec.block_values(theta);
  if (spec.block == ParamBlock::Rhs) {
    out.b = vals;
    if (detail::has_recession_ray(out.A)) {
      throw UnboundedRegion("feasible set has a recession ray");
    }
    const auto verts = detail::feasible_vertices(out.A, out.b);
    if (verts.empty()) throw InfeasibleRegion("feasible set is empty");
    out.coord_lo =
        Vector::Constant(out.n, std::numeric_limits<double>::max());
    out.coord_hi =
        Vector::Constant(out.n, std::numeric_limits<double>::lowest());
    double bound = 0.0;
    for (const auto& v : verts) {
      out.coord_lo = out.coord_lo.cwiseMin(v);
      out.coord_hi = out.coord_hi.cwiseMax(v);
      bound = std::max(bound, v.norm());
    }
    out.bound_B = bound;
  } else {
    for (int l = 0; l < out.p; ++l) {
      out.c[static_cast<std::size_t>(l)] =
          vals.segment(static_cast<Index>(l) * out.n, out.n);
    }
  }
  return out;
}

/// Uniform rejection sampling from the feasible set, using the coordinate
/// ranges computed at construction as the proposal box.
inline std::vector<Vector> sample_feasible(const MopInstance& inst, int count,
                                           Rng& rng) {
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const long max_attempts = 200000L * count;
  Vector x(inst.n);
  for (long attempt = 0; attempt < max_attempts &&
                         static_cast<int>(pts.size()) < count;
       ++attempt) {
    for (int i = 0; i < inst.n; ++i) {
      x[i] = rng.uniform(inst.coord_lo[i], inst.coord_hi[i]);
    }
    if (x.minCoeff() >= 0.0 && ((inst.b - inst.A * x).minCoeff() >= 0.0)) {
      pts.push_back(x);
    }
  }
  if (static_cast<int>(pts.size()) < count) {
    throw InvalidInput("rejection sampling failed to reach requested count");
  }
  return pts;
}

}  // namespace imop
