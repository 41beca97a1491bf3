#pragma once

// Population-based continuous optimizers: particle swarm (PSO), wolf pack
// (WPA) and grey wolf (GWO). All minimize. Positions are clamped to the box
// after every move; traces record the best-so-far value after each iteration.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "swarmlink/error.hpp"
#include "swarmlink/rng.hpp"

namespace swarmlink::opt {

using Point = Eigen::VectorXd;

template <class F>
concept Fitness = std::invocable<F&, const Point&> &&
                  std::convertible_to<std::invoke_result_t<F&, const Point&>, double>;

struct SearchSpace {
  Point lower;
  Point upper;

  static SearchSpace cube(int dim, double lo, double hi) {
    return {Point::Constant(dim, lo), Point::Constant(dim, hi)};
  }

  int dim() const { return static_cast<int>(lower.size()); }

  void validate() const {
    detail::require(lower.size() >= 1, "SearchSpace: dim must be >= 1");
    detail::require(lower.size() == upper.size(),
                    "SearchSpace: lower and upper differ in dimension");
    detail::require((lower.array() < upper.array()).all(),
                    "SearchSpace: lower < upper must hold componentwise");
  }

  Point clamp(const Point& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

  Point sample(Rng& rng) const {
    Point x(dim());
    for (int d = 0; d < dim(); ++d) x[d] = rng.uniform(lower[d], upper[d]);
    return x;
  }

  Point extent() const { return upper - lower; }
};

struct OptimizerRun {
  Point best_position;
  double best_value = 0.0;
  std::vector<double> trace;   ///< best-so-far after each iteration
  int iterations_used = 0;
  std::size_t evaluations = 0;
};

// ---------------------------------------------------------------------------
// Particle swarm

struct PsoConfig {
  int n_particles = 40;
  double c1 = 1.49445;
  double c2 = 1.49445;
  /// Multiplies the previous velocity. 1.0 is the original update.
  double inertia = 0.729;
  /// Drop the random factor on the social term (v += c2 (g - x)).
  bool paper_literal = false;
  /// Per-dimension |v| bound as a fraction of the box extent; <= 0 disables.
  double velocity_limit = 0.5;
  int max_iters = 500;
  std::uint64_t seed = 1;
  /// Stop early once the best value is at or below this.
  std::optional<double> target_value;

  void validate() const {
    detail::require(n_particles >= 2, "PsoConfig: n_particles must be >= 2");
    detail::require(c1 >= 0 && c2 >= 0, "PsoConfig: c1, c2 must be >= 0");
    detail::require(max_iters >= 1, "PsoConfig: max_iters must be >= 1");
    detail::require(inertia >= 0, "PsoConfig: inertia must be >= 0");
  }
};

/// One velocity/position update for the whole swarm.
///
///   v <- w v + c1 R1 (p_i - x) + c2 R2 (p_g - x)
///   x <- x + v
///
/// Random draws are consumed particle by particle, dimension by dimension,
/// R1 before R2 (R2 is not drawn in paper_literal mode).
inline void pso_step(std::vector<Point>& positions, std::vector<Point>& velocities,
                     const std::vector<Point>& personal_bests,
                     const Point& global_best, const PsoConfig& config,
                     Rng& rng) {
  const std::size_t n = positions.size();
  detail::require(velocities.size() == n && personal_bests.size() == n,
                  "pso_step: population sizes differ");
  const auto dim = global_best.size();
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(positions[i].size() == dim && velocities[i].size() == dim &&
                        personal_bests[i].size() == dim,
                    "pso_step: dimension mismatch");
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double r1 = rng.uniform();
      const double r2 = config.paper_literal ? 1.0 : rng.uniform();
      const double x = positions[i][d];
      velocities[i][d] = config.inertia * velocities[i][d] +
                         config.c1 * r1 * (personal_bests[i][d] - x) +
                         config.c2 * r2 * (global_best[d] - x);
      positions[i][d] = x + velocities[i][d];
    }
  }
}

template <Fitness F>
OptimizerRun pso_optimize(F&& fitness, const SearchSpace& space,
                          const PsoConfig& config) {
  space.validate();
  config.validate();
  Rng rng(config.seed);
  const int n = config.n_particles;
  const Point extent = space.extent();
  const Point vmax = extent * config.velocity_limit;

  std::vector<Point> x(n), v(n), pbest(n);
  std::vector<double> pbest_val(n);
  OptimizerRun run;

  for (int i = 0; i < n; ++i) {
    x[i] = space.sample(rng);
    v[i] = Point(space.dim());
    for (int d = 0; d < space.dim(); ++d)
      v[i][d] = rng.uniform(-0.1, 0.1) * extent[d];
  }
  std::size_t g = 0;
  for (int i = 0; i < n; ++i) {
    pbest[i] = x[i];
    pbest_val[i] = fitness(x[i]);
    ++run.evaluations;
    if (pbest_val[i] < pbest_val[g]) g = static_cast<std::size_t>(i);
  }
  Point gbest = pbest[g];
  double gbest_val = pbest_val[g];

  for (int t = 0; t < config.max_iters; ++t) {
    pso_step(x, v, pbest, gbest, config, rng);
    for (int i = 0; i < n; ++i) {
      if (config.velocity_limit > 0) v[i] = v[i].cwiseMax(-vmax).cwiseMin(vmax);
      x[i] = space.clamp(x[i]);
      const double f = fitness(x[i]);
      ++run.evaluations;
      if (f < pbest_val[i]) {
        pbest_val[i] = f;
        pbest[i] = x[i];
      }
      if (f < gbest_val) {
        gbest_val = f;
        gbest = x[i];
      }
    }
    run.trace.push_back(gbest_val);
    run.iterations_used = t + 1;
    if (config.target_value && gbest_val <= *config.target_value) break;
  }
  run.best_position = gbest;
  run.best_value = gbest_val;
  return run;
}

// ---------------------------------------------------------------------------
// Grey wolf

struct GwoConfig {
  int n_wolves = 30;
  int max_iters = 500;
  std::uint64_t seed = 1;
  std::optional<double> target_value;

  void validate() const {
    detail::require(n_wolves >= 4, "GwoConfig: n_wolves must be >= 4");
    detail::require(max_iters >= 1, "GwoConfig: max_iters must be >= 1");
  }
};

/// Pull of one leader on one coordinate:
///   A = 2 a r1 - a,  C = 2 r2,  D = |C leader - x|,  returns leader - A D.
inline double gwo_leader_pull(double x, double leader, double a, double r1,
                              double r2) {
  const double A = 2.0 * a * r1 - a;
  const double C = 2.0 * r2;
  const double D = std::abs(C * leader - x);
  return leader - A * D;
}

/// Moves every wolf to the mean of the three leader-anchored points.
/// Draws per wolf, per dimension: (r1, r2) for alpha, then beta, then delta.
inline void gwo_step(std::vector<Point>& positions, const Point& alpha,
                     const Point& beta, const Point& delta, double a,
                     Rng& rng) {
  detail::require(a >= 0.0 && a <= 2.0, "gwo_step: a must lie in [0, 2]");
  for (auto& x : positions) {
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      double sum = 0.0;
      for (const Point* leader : {&alpha, &beta, &delta}) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        sum += gwo_leader_pull(x[d], (*leader)[d], a, r1, r2);
      }
      x[d] = sum / 3.0;
    }
  }
}

namespace internal {

struct Scored {
  Point x;
  double f;
};

/// Keeps the three best points seen so far; a leader is only displaced by a
/// strictly better candidate.
inline void update_leaders(std::vector<Scored>& leaders, const Point& x,
                           double f) {
  auto pos = std::find_if(leaders.begin(), leaders.end(),
                          [&](const Scored& s) { return f < s.f; });
  if (pos == leaders.end()) {
    if (leaders.size() < 3) leaders.push_back({x, f});
    return;
  }
  leaders.insert(pos, {x, f});
  if (leaders.size() > 3) leaders.pop_back();
}

}  // namespace internal

template <Fitness F>
OptimizerRun gwo_optimize(F&& fitness, const SearchSpace& space,
                          const GwoConfig& config) {
  space.validate();
  config.validate();
  Rng rng(config.seed);
  OptimizerRun run;

  std::vector<Point> wolves(config.n_wolves);
  std::vector<internal::Scored> leaders;
  for (auto& w : wolves) w = space.sample(rng);
  for (const auto& w : wolves) {
    internal::update_leaders(leaders, w, fitness(w));
    ++run.evaluations;
  }

  for (int t = 0; t < config.max_iters; ++t) {
    const double a = config.max_iters > 1
                         ? 2.0 * (1.0 - static_cast<double>(t) /
                                            (config.max_iters - 1))
                         : 0.0;
    gwo_step(wolves, leaders[0].x, leaders[1].x, leaders[2].x, a, rng);
    for (auto& w : wolves) {
      w = space.clamp(w);
      internal::update_leaders(leaders, w, fitness(w));
      ++run.evaluations;
    }
    run.trace.push_back(leaders[0].f);
    run.iterations_used = t + 1;
    if (config.target_value && leaders[0].f <= *config.target_value) break;
  }
  run.best_position = leaders[0].x;
  run.best_value = leaders[0].f;
  return run;
}

// ---------------------------------------------------------------------------
// Wolf pack
//
// Minimization of f stands in for maximizing the prey smell Y = -f.
// Step sizes per dimension: scouting  s_a = S (ub - lb) / dim,
//                           calling   s_b = 4 s_a,
//                           besieging s_c = 0.5 s_a.

struct WpaConfig {
  int n_wolves = 30;
  int max_iters = 500;
  double step_coeff = 0.1;          ///< S
  double distance_threshold = 0.5;  ///< L_near (Euclidean)
  int scout_max_repeats = 10;       ///< T_max
  int scout_directions = 4;         ///< probes per scouting repetition
  double renew_fraction = 0.2;      ///< beta
  std::uint64_t seed = 1;
  std::optional<double> target_value;

  void validate() const {
    detail::require(n_wolves >= 3, "WpaConfig: n_wolves must be >= 3");
    detail::require(max_iters >= 1, "WpaConfig: max_iters must be >= 1");
    detail::require(renew_fraction > 0 && renew_fraction < 1,
                    "WpaConfig: renew_fraction must lie in (0, 1)");
    detail::require(step_coeff > 0 && distance_threshold > 0 &&
                        scout_max_repeats > 0 && scout_directions > 0,
                    "WpaConfig: coefficients must be > 0");
  }

  int renew_count() const {
    const int r = static_cast<int>(std::ceil(renew_fraction * n_wolves));
    return std::min(r, n_wolves - 1);
  }
};

template <Fitness F>
OptimizerRun wpa_optimize(F&& fitness, const SearchSpace& space,
                          const WpaConfig& config) {
  space.validate();
  config.validate();
  Rng rng(config.seed);
  OptimizerRun run;
  const int n = config.n_wolves;
  const int dim = space.dim();
  const Point step_scout = config.step_coeff * space.extent() / dim;
  const Point step_call = 4.0 * step_scout;
  const Point step_siege = 0.5 * step_scout;
  const double call_reach = step_call.norm();
  constexpr int kMaxCallingMoves = 1000;

  std::vector<Point> wolves(n);
  std::vector<double> value(n);
  for (int i = 0; i < n; ++i) {
    wolves[i] = space.sample(rng);
    value[i] = fitness(wolves[i]);
    ++run.evaluations;
  }
  int lead = static_cast<int>(std::min_element(value.begin(), value.end()) -
                              value.begin());

  auto evaluate = [&](const Point& x) {
    ++run.evaluations;
    return fitness(x);
  };
  auto random_unit = [&] {
    Point u(dim);
    for (int d = 0; d < dim; ++d) u[d] = rng.normal();
    const double norm = u.norm();
    return norm > 0 ? Point(u / norm) : Point(Point::Unit(dim, 0));
  };

  for (int t = 0; t < config.max_iters; ++t) {
    // Scouting: local probes until a scout beats the lead or T_max repeats.
    for (int i = 0; i < n; ++i) {
      if (i == lead) continue;
      for (int rep = 0; rep < config.scout_max_repeats; ++rep) {
        Point best_probe;
        double best_probe_val = value[i];
        for (int p = 0; p < config.scout_directions; ++p) {
          Point probe = space.clamp(wolves[i] + step_scout.cwiseProduct(random_unit()));
          const double f = evaluate(probe);
          if (f < best_probe_val) {
            best_probe_val = f;
            best_probe = std::move(probe);
          }
        }
        if (best_probe.size() > 0) {
          wolves[i] = std::move(best_probe);
          value[i] = best_probe_val;
        }
        if (value[i] < value[lead]) {
          lead = i;
          break;
        }
      }
    }

    // Calling: run toward the lead until within L_near or the lead is beaten.
    for (int i = 0; i < n; ++i) {
      if (i == lead) continue;
      for (int move = 0; move < kMaxCallingMoves; ++move) {
        const Point gap = wolves[lead] - wolves[i];
        const double dist = gap.norm();
        if (dist <= config.distance_threshold) break;
        wolves[i] = space.clamp(wolves[i] +
                                step_call.cwiseProduct(gap) / std::max(dist, call_reach));
        value[i] = evaluate(wolves[i]);
        if (value[i] < value[lead]) {
          lead = i;
          break;
        }
      }
    }

    // Besieging: small greedy moves scaled by the distance to the lead.
    const Point lead_pos = wolves[lead];
    for (int i = 0; i < n; ++i) {
      if (i == lead) continue;
      Point candidate = wolves[i];
      for (int d = 0; d < dim; ++d) {
        const double lambda = rng.uniform(-1.0, 1.0);
        candidate[d] += lambda * step_siege[d] * std::abs(lead_pos[d] - wolves[i][d]);
      }
      candidate = space.clamp(candidate);
      const double f = evaluate(candidate);
      if (f < value[i]) {
        wolves[i] = std::move(candidate);
        value[i] = f;
      }
    }

    // Winner-take-all.
    for (int i = 0; i < n; ++i)
      if (value[i] < value[lead]) lead = i;

    // Strong-survive renewal: the worst wolves respawn near the lead.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return value[a] > value[b]; });
    int replaced = 0;
    for (int idx : order) {
      if (replaced == config.renew_count()) break;
      if (idx == lead) continue;
      Point x(dim);
      for (int d = 0; d < dim; ++d)
        x[d] = wolves[lead][d] + rng.uniform(-1.0, 1.0) * config.distance_threshold;
      wolves[idx] = space.clamp(x);
      value[idx] = evaluate(wolves[idx]);
      ++replaced;
    }
    for (int i = 0; i < n; ++i)
      if (value[i] < value[lead]) lead = i;

    run.trace.push_back(value[lead]);
    run.iterations_used = t + 1;
    if (config.target_value && value[lead] <= *config.target_value) break;
  }
  run.best_position = wolves[lead];
  run.best_value = value[lead];
  return run;
}

// ---------------------------------------------------------------------------
// Benchmarks

inline double sphere(const Point& x) { return x.squaredNorm(); }

inline double rastrigin(const Point& x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    s += x[i] * x[i] - 10.0 * std::cos(2.0 * std::numbers::pi * x[i]);
  return s;
}

}  // namespace swarmlink::opt
