/**
 * @file oracle.hpp
 * @brief Independent brute-force references used by tests and as regret
 *        comparators: dense-grid scalarized minimization, dense-grid batch
 *        estimation, and the closed forms of the one-dimensional
 *        two-objective interval instance.
 *
 * These deliberately avoid the active-set machinery: grid_pws evaluates the
 * scalarized objective on a feasibility-filtered lattice and nothing else.
 */

#pragma once

#include <cmath>
#include <vector>

#include "imop/loss.hpp"
#include "imop/model.hpp"
#include "imop/rng.hpp"

namespace imop {

/// Dense-grid argmin of wᵀf over the feasible set (n <= 2 only). The grid
/// spans the per-coordinate feasible ranges recorded at construction.
inline Vector grid_pws(const MopInstance& inst, const Vector& w,
                       double grid_step) {
  if (inst.n > 2) throw UnsupportedDimension("grid oracle supports n <= 2");
  if (!(grid_step > 0.0)) throw InvalidParameter("grid step must be positive");

  const auto feasible = [&](const Vector& x) {
    return x.minCoeff() >= -1e-12 && (inst.b - inst.A * x).minCoeff() >= -1e-12;
  };
  const auto value = [&](const Vector& x) {
    double v = 0.0;
    for (int l = 0; l < inst.p; ++l) v += w[l] * inst.objective(l, x);
    return v;
  };

  double best = std::numeric_limits<double>::infinity();
  Vector best_x;
  if (inst.n == 1) {
    Vector x(1);
    for (double u = inst.coord_lo[0]; u <= inst.coord_hi[0] + 0.5 * grid_step;
         u += grid_step) {
      x[0] = u;
      if (!feasible(x)) continue;
      const double v = value(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
  } else {
    Vector x(2);
    for (double u = inst.coord_lo[0]; u <= inst.coord_hi[0] + 0.5 * grid_step;
         u += grid_step) {
      for (double v2 = inst.coord_lo[1];
           v2 <= inst.coord_hi[1] + 0.5 * grid_step; v2 += grid_step) {
        x[0] = u;
        x[1] = v2;
        if (!feasible(x)) continue;
        const double v = value(x);
        if (v < best) {
          best = v;
          best_x = x;
        }
      }
    }
  }
  if (best_x.size() == 0) throw InfeasibleRegion("no feasible grid point");
  return best_x;
}

/// Closed-form scalarized minimizer of the interval instance
/// f_l(x) = x^2 - 2 theta_l x over 0 <= x <= 10.
inline double closed_form_1d(const Vector& theta, const Vector& w) {
  const double target = w[0] * theta[0] + w[1] * theta[1];
  return std::min(10.0, std::max(0.0, target));
}

/// Ideal loss for the interval instance: squared distance from y to the
/// efficient interval [min theta, max theta] clipped to [0, 10].
inline double closed_form_ideal_loss_1d(double y, const Vector& theta) {
  const double lo = std::min(10.0, std::max(0.0, theta.minCoeff()));
  const double hi = std::min(10.0, std::max(0.0, theta.maxCoeff()));
  if (y < lo) return (lo - y) * (lo - y);
  if (y > hi) return (y - hi) * (y - hi);
  return 0.0;
}

/// Batch comparator: theta minimizing the total surrogate loss over a dense
/// grid of the hypothesis box (dim <= 4), scanned lexicographically with
/// ties kept at the first minimizer. An optional refinement pass re-scans a
/// shrunk box around the coarse best at one tenth of the step.
inline Vector batch_estimate(const MopInstance& inst,
                             const std::vector<Observation>& obs,
                             const WeightGrid& grid, double theta_step,
                             int refine_passes = 1) {
  if (obs.empty()) throw InvalidInput("batch estimate needs observations");
  if (!inst.param.has_value()) {
    throw InvalidParameter("instance has no learnable block");
  }
  const ParamSpec& spec = *inst.param;
  const Index d = spec.dim();
  if (d > 4) throw UnsupportedDimension("dense grid limited to dim <= 4");

  const auto total_loss = [&](const Vector& theta) {
    const MopInstance at_theta = substitute(inst, theta);
    const auto pts = sampled_efficient_points(at_theta, grid);
    double total = 0.0;
    for (const auto& o : obs) total += nearest_sampled_point(pts, o.y).value;
    return total;
  };

  Vector lo = spec.lower;
  Vector hi = spec.upper;
  double step = theta_step;
  Vector best_theta;
  double best_val = std::numeric_limits<double>::infinity();

  for (int pass = 0; pass <= refine_passes; ++pass) {
    std::vector<long> counts(static_cast<std::size_t>(d));
    long total_points = 1;
    for (Index i = 0; i < d; ++i) {
      counts[static_cast<std::size_t>(i)] =
          static_cast<long>(std::floor((hi[i] - lo[i]) / step + 1e-12)) + 1;
      total_points *= counts[static_cast<std::size_t>(i)];
    }
    Vector theta(d);
    for (long flat = 0; flat < total_points; ++flat) {
      long rem = flat;
      for (Index i = 0; i < d; ++i) {
        const long ci = rem % counts[static_cast<std::size_t>(i)];
        rem /= counts[static_cast<std::size_t>(i)];
        theta[i] = std::min(hi[i], lo[i] + step * static_cast<double>(ci));
      }
      const double v = total_loss(theta);
      if (v < best_val) {
        best_val = v;
        best_theta = theta;
      }
    }
    if (pass < refine_passes) {
      for (Index i = 0; i < d; ++i) {
        lo[i] = std::max(spec.lower[i], best_theta[i] - step);
        hi[i] = std::min(spec.upper[i], best_theta[i] + step);
      }
      step /= 10.0;
    }
  }
  return best_theta;
}

}  // namespace imop
