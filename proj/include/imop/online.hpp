/**
 * @file online.hpp
 * @brief Online learning loop, learning-rate schedule, regret comparator,
 *        and goodness-of-fit statistic.
 */

#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "imop/loss.hpp"
#include "imop/model.hpp"
#include "imop/update.hpp"

namespace imop {

enum class Algorithm { Full, Accelerated };

struct RunConfig {
  Algorithm algorithm = Algorithm::Full;
  int T = 1;
  int K = 2;
  double eta0 = 5.0;
  std::uint64_t seed = 0;        // recorded in logs; the stream is external
  bool interior_grid = false;    // sample the learning grid off the boundary
  int workers = 1;
  std::optional<Vector> theta_init;   // default: projection of 0 onto Θ
  std::optional<Vector> theta_true;   // enables estimation-error logging
  double obs_radius = 0.0;            // 0: default to 2B + 10
};

struct RoundLog {
  int t = 0;
  double loss = 0.0;
  int k_used = -1;
  Vector theta;          // estimate used in this round
  double wall_ms = 0.0;  // update solve only; 0 on shortcut rounds
  double est_error = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
  std::vector<RoundLog> rounds;
  Vector theta_final;
  WeightGrid grid;
  double total_update_wall_ms = 0.0;
  long radius_violations = 0;
  long shortcut_rounds = 0;
};

inline double learning_rate(int t, double eta0) {
  if (t < 1) throw InvalidParameter("round index starts at 1");
  return eta0 / std::sqrt(static_cast<double>(t));
}

/// Runs the configured algorithm over the observation stream. The round
/// loop is strictly sequential; only the per-round update may parallelize.
inline RunResult run_online(const MopInstance& inst,
                            const std::vector<Observation>& stream,
                            const RunConfig& cfg) {
  if (!inst.param.has_value()) {
    throw InvalidParameter("instance has no learnable block");
  }
  if (cfg.T < 1 || static_cast<int>(stream.size()) != cfg.T) {
    throw InvalidInput("stream length must equal T >= 1");
  }
  if (cfg.K < 2) throw InvalidParameter("need K >= 2");
  if (!(cfg.eta0 > 0.0)) throw InvalidParameter("eta0 must be positive");

  const ParamSpec& spec = *inst.param;
  Vector theta = cfg.theta_init.has_value()
                     ? *cfg.theta_init
                     : spec.clamp(Vector::Zero(spec.dim()));
  if (!spec.contains(theta)) {
    throw OutOfHypothesisSet("initial theta outside the hypothesis box");
  }

  RunResult out;
  out.grid = even_grid(inst.p, cfg.K, cfg.interior_grid);
  const double radius = cfg.obs_radius > 0.0 ? cfg.obs_radius
                                             : 2.0 * inst.bound_B + 10.0;
  PwsCache cache;
  cache.resize(cfg.K);

  out.rounds.reserve(static_cast<std::size_t>(cfg.T));
  for (int t = 1; t <= cfg.T; ++t) {
    const Observation& obs = stream[static_cast<std::size_t>(t - 1)];
    if (!obs.within_radius(radius)) ++out.radius_violations;

    const MopInstance at_theta = substitute(inst, theta);
    const auto pts = sampled_efficient_points(at_theta, out.grid, &cache);
    const LossResult loss = nearest_sampled_point(pts, obs.y);

    RoundLog log;
    log.t = t;
    log.loss = loss.value;
    log.theta = theta;
    if (cfg.theta_true.has_value()) {
      log.est_error = (theta - *cfg.theta_true).norm();
    }

    if (loss.value < kZeroLossTol) {
      log.k_used = loss.k_star;
      ++out.shortcut_rounds;
    } else {
      const double eta = learning_rate(t, cfg.eta0);
      const auto start = std::chrono::steady_clock::now();
      const UpdateResult upd =
          cfg.algorithm == Algorithm::Full
              ? algorithm1_update(inst, theta, obs, eta, out.grid,
                                  cfg.workers, &pts)
              : algorithm2_update(inst, theta, obs, eta, out.grid, &pts);
      const auto stop = std::chrono::steady_clock::now();
      log.wall_ms =
          std::chrono::duration<double, std::milli>(stop - start).count();
      out.total_update_wall_ms += log.wall_ms;
      log.k_used = upd.k_used;
      theta = upd.theta_next;
    }
    out.rounds.push_back(std::move(log));
  }
  out.theta_final = theta;
  return out;
}

/// R_t = Σ_{s<=t} [ l_K(y_s, θ_s) - l_K(y_s, θ_ref) ], using the logged
/// per-round losses and a fixed comparator.
inline std::vector<double> empirical_regret(const std::vector<RoundLog>& logs,
                                            const MopInstance& inst,
                                            const WeightGrid& grid,
                                            const std::vector<Observation>& obs,
                                            const Vector& theta_ref) {
  if (logs.size() != obs.size()) {
    throw InvalidInput("log and observation counts differ");
  }
  const MopInstance at_ref = substitute(inst, theta_ref);
  const auto ref_pts = sampled_efficient_points(at_ref, grid);
  std::vector<double> regret;
  regret.reserve(logs.size());
  double cum = 0.0;
  for (std::size_t s = 0; s < logs.size(); ++s) {
    const double ref_loss = nearest_sampled_point(ref_pts, obs[s].y).value;
    cum += logs[s].loss - ref_loss;
    regret.push_back(cum);
  }
  return regret;
}

/// Pearson statistic Σ (obs - exp)² / exp. Adjacent bins are merged left to
/// right until every merged bin has expected count >= 5.
inline double chi_square_statistic(const std::vector<long>& observed,
                                   const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw InvalidInput("observed/expected size mismatch");
  }
  std::vector<double> merged_exp;
  std::vector<double> merged_obs;
  double acc_exp = 0.0;
  double acc_obs = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_exp += expected[i];
    acc_obs += static_cast<double>(observed[i]);
    if (acc_exp >= 5.0) {
      merged_exp.push_back(acc_exp);
      merged_obs.push_back(acc_obs);
      acc_exp = 0.0;
      acc_obs = 0.0;
    }
  }
  if (acc_exp > 0.0 || acc_obs > 0.0) {
    if (merged_exp.empty()) {
      throw InsufficientExpectedCounts(
          "expected counts below 5 even after merging");
    }
    merged_exp.back() += acc_exp;
    merged_obs.back() += acc_obs;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < merged_exp.size(); ++i) {
    const double diff = merged_obs[i] - merged_exp[i];
    stat += diff * diff / merged_exp[i];
  }
  return stat;
}

/// Expected per-bin masses of the grid weights' first coordinate under a
/// Normal(mean, sd) truncated to [0, 1]; bin edges are midpoints between
/// consecutive grid values.
inline std::vector<double> truncated_normal_bin_masses(const WeightGrid& grid,
                                                       double mean, double sd) {
  const auto cdf = [&](double x) {
    return 0.5 * (1.0 + std::erf((x - mean) / (sd * std::sqrt(2.0))));
  };
  const double z = cdf(1.0) - cdf(0.0);
  std::vector<double> masses;
  masses.reserve(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    const double u = grid[k][0];
    const double lo = k == 0 ? 0.0 : 0.5 * (grid[k - 1][0] + u);
    const double hi =
        k == grid.size() - 1 ? 1.0 : 0.5 * (u + grid[k + 1][0]);
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    masses.push_back((cdf(b) - cdf(a)) / z);
  }
  return masses;
}

}  // namespace imop
