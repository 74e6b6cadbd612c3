#include <catch2/catch_amalgamated.hpp>

#include "imop/datagen.hpp"
#include "imop/loss.hpp"

using namespace imop;

TEST_CASE("portfolio data tables") {
  const PortfolioData d = portfolio_data();
  REQUIRE(d.expected_return[0] == 0.1791);
  REQUIRE(d.expected_return[7] == 0.0368);
  REQUIRE(d.covariance(0, 0) == 0.1641);
  REQUIRE(d.covariance(4, 1) == 0.0527);
  REQUIRE((d.covariance - d.covariance.transpose()).norm() == 0.0);
  for (int i = 0; i < 8; ++i) REQUIRE(d.upper_bounds[i] == 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(d.covariance, Eigen::EigenvaluesOnly);
  REQUIRE(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("portfolio instance encodes the eliminated simplex") {
  const MopInstance inst = make_portfolio_instance();
  REQUIRE(inst.n == 7);
  REQUIRE(inst.q == 9);
  REQUIRE(inst.num_rows() == kActiveSetBudget);
  REQUIRE(inst.bound_B == Catch::Approx(1.0));
  REQUIRE_FALSE(inst.strongly_convex);  // first objective is linear

  SECTION("truth reproduces the embedded linear terms") {
    const MopInstance at_truth = substitute(inst, portfolio_truth());
    REQUIRE(at_truth == inst);
  }

  SECTION("objectives match the full-space model") {
    const PortfolioData d = portfolio_data();
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const auto zs = sample_feasible(inst, 1, rng);
      const Vector& z = zs.front();
      Vector x(8);
      x.head(7) = z;
      x[7] = 1.0 - z.sum();
      // Dropped constants: -r_8 in the return objective, cov(8,8) in the
      // variance objective.
      const double f1 = inst.objective(0, z);
      REQUIRE(f1 == Catch::Approx(-d.expected_return.dot(x) + d.expected_return[7])
                        .margin(1e-12));
      const double f2 = inst.objective(1, z);
      REQUIRE(f2 == Catch::Approx(x.dot(d.covariance * x) - d.covariance(7, 7))
                        .margin(1e-10));
    }
  }
}

TEST_CASE("benchmark stream generation") {
  const MopInstance inst = make_mqp_c_instance();

  SECTION("noise bounded by the halfwidth") {
    const MqpStream s = gen_mqp_stream(inst, 200, 0.5, 3);
    for (int t = 0; t < 200; ++t) {
      Vector w(2);
      w << s.weights[static_cast<std::size_t>(t)],
          1.0 - s.weights[static_cast<std::size_t>(t)];
      const Vector x = solve_pws(inst, w).x;
      const Vector dev =
          (s.observations[static_cast<std::size_t>(t)].y - x).cwiseAbs();
      REQUIRE(dev.maxCoeff() <= 0.5 + 1e-12);
    }
  }

  SECTION("noiseless decisions are undominated") {
    const MqpStream s = gen_mqp_stream(inst, 30, 0.0, 5);
    Rng rng(11);
    const auto random_pts = sample_feasible(inst, 2000, rng);
    for (const auto& o : s.observations) {
      const Vector fo = inst.objectives(o.y);
      for (const auto& x : random_pts) {
        const Vector fx = inst.objectives(x);
        const bool dominates = (fx.array() <= fo.array() + 1e-9).all() &&
                               (fx.array() < fo.array() - 1e-9).any();
        REQUIRE_FALSE(dominates);
      }
    }
  }

  SECTION("deterministic under the seed") {
    const MqpStream a = gen_mqp_stream(inst, 50, 0.5, 9);
    const MqpStream b = gen_mqp_stream(inst, 50, 0.5, 9);
    for (int t = 0; t < 50; ++t) {
      REQUIRE(a.observations[static_cast<std::size_t>(t)].y ==
              b.observations[static_cast<std::size_t>(t)].y);
    }
  }

  SECTION("hidden weights are uniform on average") {
    const MqpStream s = gen_mqp_stream(inst, 1000, 0.5, 13);
    double mean = 0.0;
    for (const double u : s.weights) mean += u;
    mean /= 1000.0;
    REQUIRE(mean == Catch::Approx(0.5).margin(0.03));
  }
}

TEST_CASE("portfolio stream generation") {
  const MopInstance inst = make_portfolio_instance();
  const PortfolioStream s = gen_portfolio_stream(inst, 100, 7);

  SECTION("rounding keeps the budget within the 8-coordinate bound") {
    for (const auto& o : s.observations_full) {
      REQUIRE(o.y.size() == 8);
      REQUIRE(std::abs(o.y.sum() - 1.0) <= 0.004 + 1e-12);
      for (Index i = 0; i < 8; ++i) {
        const double scaled = o.y[i] * 1000.0;
        REQUIRE(std::abs(scaled - std::round(scaled)) <= 1e-9);
      }
    }
  }

  SECTION("learner view is the first seven coordinates") {
    for (std::size_t t = 0; t < s.observations.size(); ++t) {
      REQUIRE(s.observations[t].y == s.observations_full[t].y.head(7));
    }
  }

  SECTION("deterministic under the seed") {
    const PortfolioStream b = gen_portfolio_stream(inst, 100, 7);
    for (std::size_t t = 0; t < s.observations.size(); ++t) {
      REQUIRE(s.observations[t].y == b.observations[t].y);
    }
  }

  SECTION("unrounded decisions are undominated") {
    // Re-derive the exact decisions from the hidden weights.
    Rng rng(23);
    const auto random_pts = sample_feasible(inst, 1000, rng);
    std::vector<Vector> fvals;
    fvals.reserve(random_pts.size());
    for (const auto& x : random_pts) fvals.push_back(inst.objectives(x));
    for (int t = 0; t < 20; ++t) {
      Vector w(2);
      w << s.weights[static_cast<std::size_t>(t)],
          1.0 - s.weights[static_cast<std::size_t>(t)];
      const Vector z = solve_pws(inst, w).x;
      const Vector fz = inst.objectives(z);
      for (const auto& fx : fvals) {
        const bool dominates = (fx.array() <= fz.array() + 1e-9).all() &&
                               (fx.array() < fz.array() - 1e-9).any();
        REQUIRE_FALSE(dominates);
      }
    }
  }
}
