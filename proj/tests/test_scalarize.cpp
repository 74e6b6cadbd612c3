#include <catch2/catch_amalgamated.hpp>

#include "imop/datagen.hpp"
#include "imop/loss.hpp"
#include "imop/oracle.hpp"
#include "imop/scalarize.hpp"

using namespace imop;

namespace {
Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("even weight grids") {
  SECTION("K=3 covers the endpoints and the midpoint") {
    const WeightGrid g = even_grid(2, 3, false);
    REQUIRE(g.size() == 3);
    REQUIRE(g[0].isApprox(vec2(0.0, 1.0)));
    REQUIRE(g[1].isApprox(vec2(0.5, 0.5)));
    REQUIRE(g[2].isApprox(vec2(1.0, 0.0)));
  }

  SECTION("K=41 spacing is k/40") {
    const WeightGrid g = even_grid(2, 41, false);
    REQUIRE(g.size() == 41);
    for (int k = 0; k <= 40; ++k) {
      REQUIRE(g[k][0] == Catch::Approx(k / 40.0).margin(1e-15));
      REQUIRE(g[k].sum() == Catch::Approx(1.0).margin(1e-12));
    }
  }

  SECTION("interior grid stays off the boundary") {
    const WeightGrid g = even_grid(2, 5, true);
    for (int k = 0; k < g.size(); ++k) {
      REQUIRE(g[k].minCoeff() >= kInteriorOffset - 1e-15);
      REQUIRE(g.weights[static_cast<std::size_t>(k)].strictly_positive);
    }
  }

  SECTION("grid mode rejects p > 2") {
    REQUIRE_THROWS_AS(even_grid(3, 10), UnsupportedDimension);
  }

  SECTION("K < 2 rejected") {
    REQUIRE_THROWS_AS(even_grid(2, 1), InvalidParameter);
  }
}

TEST_CASE("uniform simplex sampling for p > 2") {
  const WeightGrid g = sample_uniform_simplex(3, 50, 9);
  REQUIRE(g.size() == 50);
  Vector mean = Vector::Zero(3);
  for (int k = 0; k < g.size(); ++k) {
    REQUIRE(g[k].minCoeff() >= 0.0);
    REQUIRE(g[k].sum() == Catch::Approx(1.0).margin(1e-12));
    mean += g[k];
  }
  mean /= 50.0;
  // Uniform simplex mean is (1/3, 1/3, 1/3).
  REQUIRE((mean - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff() < 0.12);
  // Deterministic under the seed.
  const WeightGrid g2 = sample_uniform_simplex(3, 50, 9);
  for (int k = 0; k < g.size(); ++k) REQUIRE(g[k] == g2[k]);
}

TEST_CASE("truncated normal weights") {
  SECTION("empirical mean tracks the target") {
    const auto ws = sample_truncated_normal_weights(1000, 0.5, 0.1, 42);
    double mean = 0.0;
    for (const auto& w : ws) mean += w.w[0];
    mean /= 1000.0;
    REQUIRE(mean == Catch::Approx(0.5).margin(0.02));
  }

  SECTION("degenerate sd collapses to the mean") {
    const auto ws = sample_truncated_normal_weights(20, 0.5, 1e-9, 1);
    for (const auto& w : ws) {
      REQUIRE(w.w[0] == Catch::Approx(0.5).margin(1e-6));
    }
  }

  SECTION("mean outside (0,1) rejected") {
    REQUIRE_THROWS_AS(sample_truncated_normal_weights(10, 1.5, 0.1, 1),
                      InvalidParameter);
    REQUIRE_THROWS_AS(sample_truncated_normal_weights(10, 0.5, 0.0, 1),
                      InvalidParameter);
  }

  SECTION("deterministic under the seed") {
    const auto a = sample_truncated_normal_weights(50, 0.5, 0.1, 7);
    const auto b = sample_truncated_normal_weights(50, 0.5, 0.1, 7);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].w == b[i].w);
  }
}

TEST_CASE("weighted-sum solves on the MQP benchmark") {
  const MopInstance inst = make_mqp_instance();

  SECTION("endpoint weights hit the known optima") {
    const EfficientPoint e1 = solve_pws(inst, vec2(1.0, 0.0));
    REQUIRE(e1.x.norm() <= 1e-9);
    const EfficientPoint e2 = solve_pws(inst, vec2(0.0, 1.0));
    REQUIRE(e2.x[0] == Catch::Approx(3.0).margin(1e-9));
    REQUIRE(e2.x[1] == Catch::Approx(3.0).margin(1e-9));
    // Multipliers certify optimality on the stacked rows.
    const Matrix G = inst.ineq_matrix();
    const Vector grad =
        scalarized_hessian(inst, vec2(0, 1)) * e2.x +
        scalarized_linear(inst, vec2(0, 1)) + G.transpose() * e2.mult;
    REQUIRE(grad.cwiseAbs().maxCoeff() <= 1e-8);
    REQUIRE(e2.mult.minCoeff() >= -1e-8);
  }

  SECTION("interval instance midpoint weight") {
    const MopInstance interval = make_interval_instance(vec2(2.0, 4.0));
    const EfficientPoint ep = solve_pws(interval, vec2(0.5, 0.5));
    REQUIRE(ep.x[0] == Catch::Approx(3.0).margin(1e-9));
  }

  SECTION("oracle equivalence on random weights") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      const double u = rng.uniform01();
      const Vector w = vec2(u, 1.0 - u);
      const Vector xg = grid_pws(inst, w, 1e-3);
      const EfficientPoint ep = solve_pws(inst, w);
      REQUIRE((ep.x - xg).norm() <= 2e-3);
    }
  }

  SECTION("uniqueness under permuted constraint rows") {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
      const double u = rng.uniform01();
      const Vector w = vec2(u, 1.0 - u);
      const EfficientPoint base = solve_pws(inst, w);
      MopRaw raw;
      raw.p = inst.p;
      raw.n = inst.n;
      raw.q = inst.q;
      raw.Q = inst.Q;
      raw.c = inst.c;
      raw.A = Matrix(2, 2);
      raw.A.row(0) = inst.A.row(1);
      raw.A.row(1) = inst.A.row(0);
      raw.b = vec2(inst.b[1], inst.b[0]);
      raw.claim_strong_convexity = true;
      const MopInstance permuted = build_instance(raw);
      const EfficientPoint alt = solve_pws(permuted, w);
      REQUIRE((alt.x - base.x).norm() <= 1e-8);
    }
  }

  SECTION("verify-unique sweep agrees with the early-exit path") {
    PwsOptions opt;
    opt.verify_unique = true;
    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
      const double u = rng.uniform01();
      const Vector w = vec2(u, 1.0 - u);
      const EfficientPoint a = solve_pws(inst, w);
      const EfficientPoint b = solve_pws(inst, w, opt);
      REQUIRE((a.x - b.x).norm() <= 1e-8);
    }
  }
}

TEST_CASE("strictly positive weights give undominated points") {
  const MopInstance inst = make_mqp_instance();
  const WeightGrid grid = even_grid(2, 9, true);
  Rng rng(41);
  auto random_pts = sample_feasible(inst, 2000, rng);
  for (int k = 0; k < grid.size(); ++k) {
    const EfficientPoint ep = solve_pws(inst, grid[k]);
    std::vector<Vector> pts;
    pts.push_back(ep.x);
    for (const auto& x : random_pts) pts.push_back(x);
    const auto dominated = dominance_check(pts, inst);
    REQUIRE_FALSE(dominated[0]);
  }
}

TEST_CASE("optimal value is concave along weight segments") {
  const MopInstance inst = make_mqp_instance();
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const Vector wa = vec2(u1, 1.0 - u1);
    const Vector wb = vec2(u2, 1.0 - u2);
    const Vector wm = 0.5 * (wa + wb);
    const double va = solve_pws(inst, wa).value;
    const double vb = solve_pws(inst, wb).value;
    const double vm = solve_pws(inst, wm).value;
    REQUIRE(vm >= 0.5 * (va + vb) - 1e-9);
  }
}

TEST_CASE("semidefinite scalarizations") {
  // Pure linear first objective over the portfolio polytope.
  const MopInstance inst = make_portfolio_instance();
  const Vector w_zero_variance = vec2(1.0, 0.0);

  SECTION("rejected without the linear fallback") {
    REQUIRE_THROWS_AS(solve_pws(inst, w_zero_variance), NoKktPoint);
  }

  SECTION("fallback solves the LP when the optimum is a unique vertex") {
    PwsOptions opt;
    opt.allow_linear_fallback = true;
    const EfficientPoint ep = solve_pws(inst, w_zero_variance, opt);
    // Max expected return puts everything into security 6.
    REQUIRE(ep.x[5] == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(ep.x.sum() == Catch::Approx(1.0).margin(1e-9));
  }
}
