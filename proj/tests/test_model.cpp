#include <catch2/catch_amalgamated.hpp>

#include "imop/datagen.hpp"
#include "imop/model.hpp"

using namespace imop;

namespace {
Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("benchmark instance validates and records its constants") {
  const MopInstance inst = make_mqp_instance();
  REQUIRE(inst.p == 2);
  REQUIRE(inst.n == 2);
  REQUIRE(inst.q == 2);
  REQUIRE(inst.strongly_convex);
  REQUIRE(inst.lambda == Catch::Approx(1.0));
  // Feasible vertices: (0,0), (2,0), (3,3), (0,3).
  REQUIRE(inst.bound_B == Catch::Approx(std::sqrt(18.0)));
  REQUIRE(inst.coord_lo.isZero(1e-12));
  REQUIRE(inst.coord_hi[0] == Catch::Approx(3.0));
  REQUIRE(inst.coord_hi[1] == Catch::Approx(3.0));
}

TEST_CASE("construction errors") {
  MopRaw raw;
  raw.p = 2;
  raw.n = 2;
  raw.q = 1;
  raw.Q = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  raw.c = {Vector::Zero(2), Vector::Zero(2)};
  raw.A = Matrix::Zero(1, 2);
  raw.b = Vector::Zero(1);

  SECTION("x1 <= -1 contradicts x >= 0") {
    MopRaw bad = raw;
    bad.A << 1, 0;
    bad.b << -1;
    // Make the region bounded in x2 so only infeasibility can fail.
    bad.q = 2;
    bad.A = Matrix(2, 2);
    bad.A << 1, 0, 0, 1;
    bad.b = vec2(-1, 1);
    REQUIRE_THROWS_AS(build_instance(bad), InfeasibleRegion);
  }

  SECTION("free direction is rejected") {
    MopRaw bad = raw;
    bad.A << 1, 0;  // x2 unbounded above
    bad.b << 5;
    REQUIRE_THROWS_AS(build_instance(bad), UnboundedRegion);
  }

  SECTION("negative eigenvalue is rejected") {
    MopRaw bad = raw;
    bad.q = 2;
    bad.A = Matrix(2, 2);
    bad.A << 1, 0, 0, 1;
    bad.b = vec2(1, 1);
    bad.Q[0] = Matrix(2, 2);
    bad.Q[0] << -0.5, 0, 0, 1;
    REQUIRE_THROWS_AS(build_instance(bad), NotPsd);
  }

  SECTION("asymmetry is rejected") {
    MopRaw bad = raw;
    bad.q = 2;
    bad.A = Matrix(2, 2);
    bad.A << 1, 0, 0, 1;
    bad.b = vec2(1, 1);
    bad.Q[0] = Matrix(2, 2);
    bad.Q[0] << 1, 0.5, 0, 1;
    REQUIRE_THROWS_AS(build_instance(bad), NotPsd);
  }

  SECTION("dimension mismatches are rejected") {
    MopRaw bad = raw;
    bad.q = 2;
    bad.A = Matrix(2, 2);
    bad.A << 1, 0, 0, 1;
    bad.b = vec2(1, 1);
    bad.c[0] = Vector::Zero(3);
    REQUIRE_THROWS_AS(build_instance(bad), DimensionMismatch);
  }

  SECTION("active-set budget is enforced") {
    MopRaw bad;
    bad.p = 2;
    bad.n = 8;
    bad.q = 9;  // q + n = 17 > 16
    bad.Q = {Matrix::Identity(8, 8), Matrix::Identity(8, 8)};
    bad.c = {Vector::Zero(8), Vector::Zero(8)};
    bad.A = Matrix::Zero(9, 8);
    bad.A.topRows(8) = Matrix::Identity(8, 8);
    bad.A.row(8).setOnes();
    bad.b = Vector::Ones(9);
    REQUIRE_THROWS_AS(build_instance(bad), InvalidParameter);
  }
}

TEST_CASE("substitute") {
  const MopInstance inst = make_mqp_c_instance();

  SECTION("truth reproduces the instance") {
    const MopInstance sub = substitute(inst, mqp_c_truth());
    REQUIRE(sub == inst);
  }

  SECTION("rhs block reproduces the ground-truth region") {
    const MopInstance b_inst = make_mqp_b_instance();
    const MopInstance sub = substitute(b_inst, mqp_b_truth());
    REQUIRE(sub == b_inst);
    REQUIRE(sub.bound_B == Catch::Approx(b_inst.bound_B));
  }

  SECTION("purity: equal inputs give equal outputs, input unchanged") {
    Vector th(4);
    th << 2, 2, -3, -2;
    const MopInstance a = substitute(inst, th);
    const MopInstance b = substitute(inst, th);
    REQUIRE(a == b);
    REQUIRE(inst == make_mqp_c_instance());
  }

  SECTION("out-of-box theta is rejected") {
    Vector th(4);
    th << 7, 1, -6, -5;
    REQUIRE_THROWS_AS(substitute(inst, th), OutOfHypothesisSet);
  }

  SECTION("wrong dimension is rejected") {
    REQUIRE_THROWS_AS(substitute(inst, vec2(3, 1)), DimensionMismatch);
  }
}

TEST_CASE("hypothesis box validation") {
  const MopInstance inst = make_mqp_instance();

  SECTION("empty box is rejected") {
    REQUIRE_THROWS_AS(attach_param_spec(inst, ParamBlock::Rhs, vec2(5, 5),
                                        vec2(1, 1)),
                      InvalidParameter);
  }

  SECTION("rhs corner that empties the region is rejected") {
    REQUIRE_THROWS_AS(attach_param_spec(inst, ParamBlock::Rhs, vec2(-10, -10),
                                        vec2(10, 10)),
                      InfeasibleRegion);
  }

  SECTION("euclidean bound covers every corner") {
    const MopInstance withspec = make_mqp_c_instance();
    const ParamSpec& spec = *withspec.param;
    Vector worst(4);
    for (Index i = 0; i < 4; ++i) {
      worst[i] = std::max(std::abs(spec.lower[i]), std::abs(spec.upper[i]));
    }
    REQUIRE(spec.euclidean_bound == Catch::Approx(worst.norm()));
  }
}

TEST_CASE("recorded bound covers random feasible points") {
  const MopInstance inst = make_mqp_instance();
  Rng rng(17);
  const auto pts = sample_feasible(inst, 1000, rng);
  REQUIRE(pts.size() == 1000);
  for (const auto& x : pts) {
    REQUIRE(x.norm() <= inst.bound_B + 1e-9);
    REQUIRE(x.minCoeff() >= 0.0);
    REQUIRE((inst.b - inst.A * x).minCoeff() >= 0.0);
  }
}

TEST_CASE("observation radius check records, never rejects") {
  Observation o{1, vec2(100.0, 100.0)};
  REQUIRE_FALSE(o.within_radius(10.0));
  REQUIRE(o.within_radius(1000.0));
}
