/**
 * @file loss.hpp
 * @brief Surrogate loss against the sampled efficient set, weight
 *        assignment, and dominance checks.
 */

#pragma once

#include <vector>

#include "imop/model.hpp"
#include "imop/scalarize.hpp"

namespace imop {

/// Losses below this count as zero for the update shortcut.
inline constexpr double kZeroLossTol = 1e-9;

struct LossResult {
  double value = 0.0;  // squared distance to the nearest sampled point
  int k_star = -1;     // index of the minimizing weight (ties: smallest k)
  Vector x_star;
};

/// Mutable warm-start cache of active sets, one per grid weight.
struct PwsCache {
  std::vector<std::vector<int>> active_sets;

  void resize(int K) { active_sets.resize(static_cast<std::size_t>(K)); }
  const std::vector<int>* hint(int k) const {
    const auto& h = active_sets[static_cast<std::size_t>(k)];
    return h.empty() ? nullptr : &h;
  }
  void store(int k, const std::vector<int>& act) {
    active_sets[static_cast<std::size_t>(k)] = act;
  }
};

/// Solves the weighted-sum problem for every grid weight on an already
/// substituted instance.
inline std::vector<EfficientPoint> sampled_efficient_points(
    const MopInstance& inst, const WeightGrid& grid, PwsCache* cache = nullptr) {
  std::vector<EfficientPoint> pts;
  pts.reserve(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    PwsOptions opt;
    if (cache != nullptr) opt.hint = cache->hint(k);
    EfficientPoint ep = solve_pws(inst, grid[k], opt);
    if (cache != nullptr) cache->store(k, ep.active);
    pts.push_back(std::move(ep));
  }
  return pts;
}

/// Minimum squared distance from y to precomputed sampled points.
inline LossResult nearest_sampled_point(const std::vector<EfficientPoint>& pts,
                                        const Vector& y) {
  LossResult res;
  res.value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    const double dist = (y - pts[static_cast<std::size_t>(k)].x).squaredNorm();
    if (dist < res.value) {
      res.value = dist;
      res.k_star = k;
    }
  }
  res.x_star = pts[static_cast<std::size_t>(res.k_star)].x;
  return res;
}

/// l_K(y, theta): minimum squared distance from y to the union of the
/// sampled efficient points of the instance at theta.
inline LossResult surrogate_loss(const MopInstance& inst, const Vector& theta,
                                 const WeightGrid& grid, const Observation& y,
                                 PwsCache* cache = nullptr) {
  const MopInstance at_theta = substitute(inst, theta);
  const auto pts = sampled_efficient_points(at_theta, grid, cache);
  return nearest_sampled_point(pts, y.y);
}

/// Histogram of nearest-weight assignments over a batch of observations.
struct WeightHistogram {
  std::vector<long> counts;        // per grid index
  std::vector<double> proportions; // counts / total
  long total = 0;
};

inline WeightHistogram assign_weights(const MopInstance& inst,
                                      const Vector& theta,
                                      const WeightGrid& grid,
                                      const std::vector<Observation>& obs) {
  const MopInstance at_theta = substitute(inst, theta);
  const auto pts = sampled_efficient_points(at_theta, grid);
  WeightHistogram hist;
  hist.counts.assign(static_cast<std::size_t>(grid.size()), 0);
  for (const auto& o : obs) {
    const LossResult r = nearest_sampled_point(pts, o.y);
    ++hist.counts[static_cast<std::size_t>(r.k_star)];
  }
  hist.total = static_cast<long>(obs.size());
  hist.proportions.resize(hist.counts.size());
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    hist.proportions[k] =
        hist.total == 0
            ? 0.0
            : static_cast<double>(hist.counts[k]) / static_cast<double>(hist.total);
  }
  return hist;
}

/// flags[i] is true iff some other point is at least as good in every
/// objective and strictly better in one (tolerance 1e-9).
inline std::vector<bool> dominance_check(const std::vector<Vector>& points,
                                         const MopInstance& inst) {
  if (points.empty()) throw InvalidInput("dominance check needs >= 1 point");
  const double tol = 1e-9;
  const std::size_t count = points.size();
  std::vector<Vector> fvals(count);
  for (std::size_t i = 0; i < count; ++i) fvals[i] = inst.objectives(points[i]);
  std::vector<bool> dominated(count, false);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count && !dominated[i]; ++j) {
      if (j == i) continue;
      bool all_leq = true;
      bool one_strict = false;
      for (Index l = 0; l < fvals[i].size(); ++l) {
        if (fvals[j][l] > fvals[i][l] + tol) {
          all_leq = false;
          break;
        }
        if (fvals[j][l] < fvals[i][l] - tol) one_strict = true;
      }
      dominated[i] = all_leq && one_strict;
    }
  }
  return dominated;
}

}  // namespace imop
