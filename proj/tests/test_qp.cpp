#include <catch2/catch_amalgamated.hpp>

#include "imop/qp.hpp"
#include "imop/rng.hpp"

using namespace imop;

namespace {

/// Box-constrained least squares has a closed form: coordinatewise clamp of
/// the unconstrained minimizer when H is diagonal.
QpProblem diagonal_box_problem(const Vector& diag, const Vector& target,
                               const Vector& lo, const Vector& hi) {
  const Index n = diag.size();
  QpProblem qp;
  qp.H = diag.asDiagonal();
  qp.c = -(diag.asDiagonal() * target);
  qp.C = Matrix(2 * n, n);
  qp.d = Vector(2 * n);
  qp.C.topRows(n) = Matrix::Identity(n, n);
  qp.C.bottomRows(n) = -Matrix::Identity(n, n);
  qp.d.head(n) = hi;
  qp.d.tail(n) = -lo;
  return qp;
}

}  // namespace

TEST_CASE("diagonal box projection matches the clamp closed form") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.raw() % 3);
    Vector diag(n), target(n), lo(n), hi(n);
    for (Index i = 0; i < n; ++i) {
      diag[i] = rng.uniform(0.5, 3.0);
      target[i] = rng.uniform(-4.0, 4.0);
      lo[i] = rng.uniform(-2.0, 0.0);
      hi[i] = lo[i] + rng.uniform(0.5, 3.0);
    }
    const QpProblem qp = diagonal_box_problem(diag, target, lo, hi);
    const QpResult res = solve_qp_enumerate(qp);
    REQUIRE(res.solved);
    for (Index i = 0; i < n; ++i) {
      const double expect = std::min(hi[i], std::max(lo[i], target[i]));
      REQUIRE(res.x[i] == Catch::Approx(expect).margin(1e-9));
    }
  }
}

TEST_CASE("certificates satisfy the KKT conditions") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    // Random strictly convex QP over a random bounded polyhedron that
    // contains the origin.
    const Index n = 2 + static_cast<Index>(rng.raw() % 2);
    Matrix R(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) R(i, j) = rng.uniform(-1, 1);
    }
    QpProblem qp;
    qp.H = R.transpose() * R + 0.3 * Matrix::Identity(n, n);
    qp.c = Vector(n);
    for (Index i = 0; i < n; ++i) qp.c[i] = rng.uniform(-2, 2);
    const int extra = 3;
    qp.C = Matrix(2 * n + extra, n);
    qp.d = Vector(2 * n + extra);
    qp.C.topRows(n) = Matrix::Identity(n, n);
    qp.C.middleRows(n, n) = -Matrix::Identity(n, n);
    qp.d.head(2 * n).setConstant(2.0);
    for (int r = 0; r < extra; ++r) {
      for (Index j = 0; j < n; ++j) qp.C(2 * n + r, j) = rng.uniform(-1, 1);
      qp.d[2 * n + r] = rng.uniform(0.5, 2.0);  // keeps 0 feasible
    }
    const QpResult res = solve_qp_enumerate(qp);
    REQUIRE(res.solved);
    // Stationarity with the returned multipliers.
    const Vector grad = qp.H * res.x + qp.c + qp.C.transpose() * res.mult;
    REQUIRE(grad.cwiseAbs().maxCoeff() <= 1e-7);
    REQUIRE(res.mult.minCoeff() >= -1e-8);
    REQUIRE((qp.d - qp.C * res.x).minCoeff() >= -1e-8);
    // Complementarity: inactive rows carry zero multipliers by construction.
    for (Index r = 0; r < qp.C.rows(); ++r) {
      const double slack = qp.d[r] - qp.C.row(r).dot(res.x);
      if (res.mult[r] > 1e-8) REQUIRE(slack <= 1e-7);
    }
  }
}

TEST_CASE("infeasible systems report no solution") {
  QpProblem qp;
  qp.H = Matrix::Identity(1, 1);
  qp.c = Vector::Zero(1);
  qp.C = Matrix(2, 1);
  qp.C << 1, -1;
  qp.d = Vector(2);
  qp.d << -1, -1;  // x <= -1 and x >= 1
  const QpResult res = solve_qp_enumerate(qp);
  REQUIRE_FALSE(res.solved);
}

TEST_CASE("warm hint returns the same point as cold enumeration") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Vector diag(3), target(3), lo(3), hi(3);
    for (Index i = 0; i < 3; ++i) {
      diag[i] = rng.uniform(0.5, 2.0);
      target[i] = rng.uniform(-3.0, 3.0);
      lo[i] = -1.0;
      hi[i] = 1.0;
    }
    const QpProblem qp = diagonal_box_problem(diag, target, lo, hi);
    const QpResult cold = solve_qp_enumerate(qp);
    // Perturb the problem slightly and warm start from the stale set.
    Vector target2 = target;
    target2[0] += 0.05;
    const QpProblem qp2 = diagonal_box_problem(diag, target2, lo, hi);
    QpOptions opt;
    opt.hint = &cold.active;
    const QpResult warm = solve_qp_enumerate(qp2, opt);
    const QpResult cold2 = solve_qp_enumerate(qp2);
    REQUIRE(warm.solved);
    REQUIRE((warm.x - cold2.x).norm() <= 1e-9);
  }
}
