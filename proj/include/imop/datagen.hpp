/**
 * @file datagen.hpp
 * @brief Built-in benchmark instances and observation-stream generators.
 *
 * Three instance families are embedded:
 *  - a 2x2 multiobjective QP with known objective vectors and constraints,
 *    learnable either in the stacked linear terms or in the right-hand side;
 *  - a one-dimensional two-objective instance f_l(x) = x² - 2θ_l x over
 *    [0, 10], whose efficient set is the interval [min θ, max θ];
 *  - an eight-security mean-variance portfolio model with the simplex
 *    equality eliminated into a seven-variable polyhedral form.
 */

#pragma once

#include <cmath>
#include <vector>

#include "imop/model.hpp"
#include "imop/rng.hpp"
#include "imop/scalarize.hpp"

namespace imop {

// ---------------------------------------------------------------------------
// Benchmark MQP (two variables, two objectives, two constraints).

inline MopInstance make_mqp_instance() {
  MopRaw raw;
  raw.p = 2;
  raw.n = 2;
  raw.q = 2;
  Matrix Q1(2, 2), Q2(2, 2), A(2, 2);
  Q1 << 1, 0, 0, 2;
  Q2 << 2, 0, 0, 1;
  A << 3, -1, 0, 1;
  Vector c1(2), c2(2), b(2);
  c1 << 3, 1;
  c2 << -6, -5;
  b << 6, 3;
  raw.Q = {Q1, Q2};
  raw.c = {c1, c2};
  raw.A = A;
  raw.b = b;
  raw.claim_strong_convexity = true;
  return build_instance(raw);
}

/// Learnable stacked linear terms; c1 in [1,6]^2, c2 in [-6,-1]^2.
inline MopInstance make_mqp_c_instance() {
  Vector lower(4), upper(4);
  lower << 1, 1, -6, -6;
  upper << 6, 6, -1, -1;
  return attach_param_spec(make_mqp_instance(), ParamBlock::ObjectiveLinear,
                           lower, upper);
}

inline Vector mqp_c_truth() {
  Vector th(4);
  th << 3, 1, -6, -5;
  return th;
}

/// Learnable right-hand side. The box is restricted to [0,10]^2 so that
/// every corner keeps the feasible set nonempty (x = 0 stays feasible).
inline MopInstance make_mqp_b_instance() {
  Vector lower = Vector::Zero(2);
  Vector upper = Vector::Constant(2, 10.0);
  return attach_param_spec(make_mqp_instance(), ParamBlock::Rhs, lower, upper);
}

inline Vector mqp_b_truth() {
  Vector th(2);
  th << 6, 3;
  return th;
}

// ---------------------------------------------------------------------------
// One-dimensional interval instance: f_l(x) = x² - 2 θ_l x on 0 <= x <= 10.
// In canonical form Q_l = [2], c_l = -2 θ_l, so θ embeds into the stacked
// linear block through the map -2·I.

inline MopInstance make_interval_instance(const Vector& theta_true) {
  MopRaw raw;
  raw.p = 2;
  raw.n = 1;
  raw.q = 1;
  raw.Q = {Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 2.0)};
  raw.c = {Vector::Constant(1, -2.0 * theta_true[0]),
           Vector::Constant(1, -2.0 * theta_true[1])};
  raw.A = Matrix::Constant(1, 1, 1.0);
  raw.b = Vector::Constant(1, 10.0);
  raw.claim_strong_convexity = true;
  const MopInstance inst = build_instance(raw);
  const Vector lower = Vector::Zero(2);
  const Vector upper = Vector::Constant(2, 10.0);
  const Vector base = Vector::Zero(2);
  const Matrix map = -2.0 * Matrix::Identity(2, 2);
  return attach_param_spec(inst, ParamBlock::ObjectiveLinear, lower, upper,
                           base, map);
}

// ---------------------------------------------------------------------------
// Portfolio data (eight securities).

struct PortfolioData {
  Vector expected_return;  // 8
  Matrix covariance;       // 8 x 8
  Vector upper_bounds;     // 8, all 1.0
};

inline PortfolioData portfolio_data() {
  PortfolioData d;
  d.expected_return = Vector(8);
  d.expected_return << 0.1791, 0.1143, 0.1357, 0.0837, 0.1653, 0.1808, 0.0352,
      0.0368;
  d.covariance = Matrix(8, 8);
  d.covariance << 0.1641, 0.0299, 0.0478, 0.0491, 0.0580, 0.0871, 0.0603,
      0.0492,  //
      0.0299, 0.0720, 0.0511, 0.0287, 0.0527, 0.0297, 0.0291, 0.0326,  //
      0.0478, 0.0511, 0.0794, 0.0498, 0.0664, 0.0479, 0.0395, 0.0523,  //
      0.0491, 0.0287, 0.0498, 0.1148, 0.0336, 0.0503, 0.0326, 0.0447,  //
      0.0580, 0.0527, 0.0664, 0.0336, 0.1073, 0.0483, 0.0402, 0.0533,  //
      0.0871, 0.0297, 0.0479, 0.0503, 0.0483, 0.1134, 0.0591, 0.0387,  //
      0.0603, 0.0291, 0.0395, 0.0326, 0.0402, 0.0591, 0.0704, 0.0244,  //
      0.0492, 0.0326, 0.0523, 0.0447, 0.0533, 0.0387, 0.0244, 0.1028;
  d.upper_bounds = Vector::Constant(8, 1.0);
  return d;
}

/// Mean-variance model min { -rᵀx, xᵀΣx } over the box-capped simplex,
/// with the equality Σx = 1 eliminated through x_8 = 1 - Σ_{i<8} x_i. The
/// remaining variables are z = (x_1..x_7); the dropped constants -r_8 and
/// Σ_88 shift each objective uniformly and do not affect minimizers or
/// dominance. Learnable: the expected returns of securities 1..5, entering
/// the first objective's linear term as c1_i = r_8 - θ_i.
inline MopInstance make_portfolio_instance() {
  const PortfolioData d = portfolio_data();
  const int n = 7;
  Matrix E(8, 7);
  E.topRows(7) = Matrix::Identity(7, 7);
  E.bottomRows(1) = -Eigen::RowVectorXd::Ones(7);
  Vector g = Vector::Zero(8);
  g[7] = 1.0;

  MopRaw raw;
  raw.p = 2;
  raw.n = n;
  raw.q = 9;
  raw.Q = {Matrix::Zero(n, n), 2.0 * E.transpose() * d.covariance * E};
  Vector c1(n);
  for (int i = 0; i < n; ++i) c1[i] = d.expected_return[7] - d.expected_return[i];
  raw.c = {c1, 2.0 * E.transpose() * (d.covariance * g)};
  raw.A = Matrix::Zero(9, n);
  raw.A.topRows(7) = Matrix::Identity(n, n);      // x_i <= b_i
  raw.A.row(7) = Eigen::RowVectorXd::Ones(n);     // x_8 >= 0
  raw.A.row(8) = -Eigen::RowVectorXd::Ones(n);    // x_8 <= b_8
  raw.b = Vector::Zero(9);
  raw.b.head(7) = d.upper_bounds.head(7);
  raw.b[7] = 1.0;
  raw.b[8] = d.upper_bounds[7] - 1.0;
  const MopInstance inst = build_instance(raw);

  // theta = (r_1..r_5) with box [0,1]^5; base carries the known returns.
  const Index block_dim = static_cast<Index>(n) * 2;
  Vector base(block_dim);
  base.head(n) = raw.c[0];
  for (int i = 0; i < 5; ++i) base[i] = d.expected_return[7];
  base.tail(n) = raw.c[1];
  Matrix map = Matrix::Zero(block_dim, 5);
  for (int i = 0; i < 5; ++i) map(i, i) = -1.0;
  const Vector lower = Vector::Zero(5);
  const Vector upper = Vector::Ones(5);
  return attach_param_spec(inst, ParamBlock::ObjectiveLinear, lower, upper,
                           base, map);
}

inline Vector portfolio_truth() {
  return portfolio_data().expected_return.head(5);
}

// ---------------------------------------------------------------------------
// Stream generation.

struct MqpStream {
  std::vector<Observation> observations;
  std::vector<double> weights;  // hidden first coordinates of w_t
};

/// Per round: draw w_t uniform on the 2-simplex, solve the weighted-sum
/// problem on the ground-truth instance, and perturb each coordinate by
/// U(-noise_halfwidth, +noise_halfwidth). Draw order per round: weight
/// first, then the n noise coordinates.
inline MqpStream gen_mqp_stream(const MopInstance& truth, int T,
                                double noise_halfwidth, std::uint64_t seed) {
  if (T < 1) throw InvalidParameter("need T >= 1");
  Rng rng(seed);
  MqpStream out;
  out.observations.reserve(static_cast<std::size_t>(T));
  out.weights.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double u = rng.uniform01();
    Vector w(2);
    w << u, 1.0 - u;
    const EfficientPoint ep = solve_pws(truth, w);
    Vector y = ep.x;
    for (int i = 0; i < truth.n; ++i) {
      y[i] += rng.uniform(-noise_halfwidth, noise_halfwidth);
    }
    out.observations.push_back(Observation{t, std::move(y)});
    out.weights.push_back(u);
  }
  return out;
}

struct PortfolioStream {
  std::vector<Observation> observations;       // 7-dim learner view
  std::vector<Observation> observations_full;  // 8-dim rounded portfolios
  std::vector<double> weights;
};

inline double round_to_thousandth(double v) {
  return std::round(v * 1000.0) / 1000.0;
}

/// Weights follow a truncated Normal(0.5, 0.1); the optimal portfolio is
/// lifted back to eight coordinates, each rounded to the nearest
/// thousandth (the measurement error), and the learner view keeps the
/// first seven coordinates.
inline PortfolioStream gen_portfolio_stream(const MopInstance& truth, int T,
                                            std::uint64_t seed) {
  if (T < 1) throw InvalidParameter("need T >= 1");
  const auto wlist = sample_truncated_normal_weights(T, 0.5, 0.1, seed);
  PortfolioStream out;
  out.observations.reserve(static_cast<std::size_t>(T));
  out.observations_full.reserve(static_cast<std::size_t>(T));
  out.weights.reserve(static_cast<std::size_t>(T));
  PwsOptions opt;
  std::vector<int> hint;
  for (int t = 1; t <= T; ++t) {
    const Vector& w = wlist[static_cast<std::size_t>(t - 1)].w;
    opt.hint = hint.empty() ? nullptr : &hint;
    const EfficientPoint ep = solve_pws(truth, w, opt);
    hint = ep.active;
    Vector full(8);
    full.head(7) = ep.x;
    full[7] = 1.0 - ep.x.sum();
    for (int i = 0; i < 8; ++i) full[i] = round_to_thousandth(full[i]);
    out.observations.push_back(Observation{t, full.head(7)});
    out.observations_full.push_back(Observation{t, full});
    out.weights.push_back(w[0]);
  }
  return out;
}

}  // namespace imop
