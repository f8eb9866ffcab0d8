#pragma once

// Follower best responses, the provider's policy pipeline and the
// leader's exhaustive strategy search.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "ecostream/allocation.hpp"
#include "ecostream/error.hpp"
#include "ecostream/incentives.hpp"
#include "ecostream/parallel.hpp"
#include "ecostream/population.hpp"
#include "ecostream/rng.hpp"

namespace ecostream {

// --- follower ---------------------------------------------------------------

struct ResponseContext {
  ModelConstants consts{};
  double lambda_mu = 10.0;
  double energy_price = 0.0;

  static ResponseContext of(const Population& pop) {
    return {pop.consts(), pop.config().lambda_mu, pop.config().energy_price};
  }
};

inline std::vector<double> binary_candidates(const UserProfile& u) { return {u.x_l, u.x_h}; }

// `steps` evenly spaced bitrates from x_l to x_h inclusive.
inline std::vector<double> grid_candidates(const UserProfile& u, std::size_t steps) {
  if (steps < 2) return binary_candidates(u);
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    out[i] = u.x_l + (u.x_h - u.x_l) * static_cast<double>(i) /
                         static_cast<double>(steps - 1);
  }
  out.back() = u.x_h;
  return out;
}

// Money-equivalent utility of streaming at x:
//   lambda U(x) + bill savings + (r + h) if x is below the default bitrate.
// With binary candidates the green action wins exactly when r + h >= r_min.
inline double response_value(const UserProfile& u, double x, double h, double r,
                             const ResponseContext& ctx) {
  const double quality = ctx.lambda_mu * utility(x, u.gamma, ctx.consts).value;
  const double savings = ctx.energy_price * energy_reduction(u.x_h, x, ctx.consts);
  const double reward = x < u.x_h ? r + h : 0.0;
  return quality + savings + reward;
}

// Ties go to the lower (greener) bitrate.
inline double best_response(const UserProfile& u, double h, double r,
                            std::span<const double> candidates, const ResponseContext& ctx) {
  if (candidates.empty()) throw ConfigError("best_response: empty candidate set");
  double best_x = 0.0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (double x : candidates) {
    if (x < u.x_l || x > u.x_h) throw ConfigError("best_response: candidate outside [x_l, x_h]");
    const double v = response_value(u, x, h, r, ctx);
    if (v > best_v || (v == best_v && x < best_x)) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

// --- provider pipeline ------------------------------------------------------

struct EvaluationMode {
  enum class Kind { Expected, MonteCarlo };
  Kind kind = Kind::Expected;
  std::size_t reps = 0;

  static EvaluationMode expected() { return {}; }
  static EvaluationMode monte_carlo(std::size_t reps) { return {Kind::MonteCarlo, reps}; }
};

struct PipelineOptions {
  RankingKey ranking = RankingKey::BaselineConsumption;
  std::size_t max_rounds = 20;
  double admin_rate = 0.04;  // MU per expected accepted offer
};

struct PolicyOutcome {
  OutcomeMetrics metrics;
  // Expected mode: round(sum p). Monte Carlo mode: mean realized count.
  double realized_switchers = 0.0;
  double realized_traffic_reduction = 0.0;  // kbps, Monte Carlo mean
  double realized_energy_reduction = 0.0;   // W, Monte Carlo mean
  std::size_t fixed_point_rounds = 0;
  std::vector<double> offers;  // sampled r_n
  std::vector<double> r_hat;   // after budget allocation
  std::vector<double> h;
  std::vector<double> p;       // acceptance at r_hat
};

// sample offers -> resolve rewards -> allocate budget -> refresh acceptance
// at the allocated offers -> metrics.
inline PolicyOutcome evaluate_policy(const Population& pop, const OfferPolicy& policy,
                                     const GameConfig& game, std::uint64_t seed,
                                     EvaluationMode mode = EvaluationMode::expected(),
                                     const PipelineOptions& options = {}) {
  game.validate(pop.size());
  PolicyOutcome out;
  out.offers = sample_offers(policy, pop, seed);

  auto fp = resolve_rewards_fixed_point(pop, out.offers, game.k, game.m, game.h,
                                        options.max_rounds, options.ranking);
  out.fixed_point_rounds = fp.rounds;
  out.h = std::move(fp.rewards.h);

  std::vector<double> de(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) de[i] = pop[i].de_max;
  out.r_hat = allocate_budget(out.offers, fp.p, de, game.budget,
                              [&](std::size_t j, double r) {
                                return acceptance_prob_gamified(r, out.h[j], pop[j].r_min,
                                                                pop[j].delta);
                              });
  out.p = acceptance_probs(pop, out.r_hat, out.h);

  std::vector<double> x_target(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) x_target[i] = pop[i].x_l;
  out.metrics = evaluate_outcome(pop, out.r_hat, out.p, x_target, game.budget,
                                 options.admin_rate);

  if (mode.kind == EvaluationMode::Kind::Expected) {
    out.realized_switchers = std::round(out.metrics.expected_switchers);
    out.realized_traffic_reduction = out.metrics.expected_traffic_reduction;
    out.realized_energy_reduction = out.metrics.expected_energy_reduction;
  } else {
    if (mode.reps < 1) throw ConfigError("evaluate_policy: Monte Carlo needs reps >= 1");
    Rng rng(derive_seed(seed, {0xacce97ULL}));
    double switchers = 0.0, traffic = 0.0, energy = 0.0;
    for (std::size_t rep = 0; rep < mode.reps; ++rep) {
      for (std::size_t i = 0; i < pop.size(); ++i) {
        if (rng.bernoulli(out.p[i])) {
          switchers += 1.0;
          traffic += pop[i].dx_max;
          energy += pop[i].de_max;
        }
      }
    }
    const double reps = static_cast<double>(mode.reps);
    out.realized_switchers = switchers / reps;
    out.realized_traffic_reduction = traffic / reps;
    out.realized_energy_reduction = energy / reps;
  }
  return out;
}

// --- leader -----------------------------------------------------------------

struct StrategyGrid {
  std::vector<std::size_t> k_values{0, 10, 50, 100, 150, 200};
  std::vector<std::size_t> m_values{0, 10, 50, 100, 150, 200};
  std::vector<double> mu_values{1, 2, 3, 4, 6};
  std::vector<double> sigma_values{0.5, 1, 2, 3};
  double h = 1000.0;
  double budget = 1.0;
  OfferFamily family = OfferFamily::Normal;
  Targeting targeting = Targeting::Random;
  LogNormalForm lognormal_form = LogNormalForm::MomentMatched;

  void validate() const {
    if (k_values.empty() || m_values.empty() || mu_values.empty() || sigma_values.empty()) {
      throw ConfigError("strategy grid: every axis needs at least one value");
    }
  }
};

struct GridPoint {
  std::size_t k_index = 0, m_index = 0, mu_index = 0, sigma_index = 0;
  std::size_t k = 0, m = 0;
  double mu = 0.0, sigma = 0.0;
  std::uint64_t seed = 0;
};

struct GridPointResult {
  GridPoint point;
  OutcomeMetrics metrics;
  double realized_switchers = 0.0;
};

struct EquilibriumResult {
  std::size_t k_star = 0, m_star = 0;
  double mu_star = 0.0, sigma_star = 0.0;
  OutcomeMetrics metrics;
  double realized_switchers = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> per_user_bitrates;       // expected bitrate x_h - p dx
  std::vector<double> best_response_bitrates;  // deterministic argmax of the money utility
  std::vector<double> acceptance;              // p at the optimum
  std::vector<GridPointResult> sweep;          // canonical grid order
};

// Valid points (k + m <= N) in canonical order, each with its own seed
// derived from (base_seed, k index, m index, mu index, sigma index).
inline std::vector<GridPoint> enumerate_grid(const StrategyGrid& grid, std::size_t n_users,
                                             std::uint64_t base_seed) {
  grid.validate();
  std::vector<GridPoint> points;
  for (std::size_t ki = 0; ki < grid.k_values.size(); ++ki) {
    for (std::size_t mi = 0; mi < grid.m_values.size(); ++mi) {
      if (grid.k_values[ki] + grid.m_values[mi] > n_users) continue;
      for (std::size_t ui = 0; ui < grid.mu_values.size(); ++ui) {
        for (std::size_t si = 0; si < grid.sigma_values.size(); ++si) {
          points.push_back({ki, mi, ui, si, grid.k_values[ki], grid.m_values[mi],
                            grid.mu_values[ui], grid.sigma_values[si],
                            derive_seed(base_seed, {ki, mi, ui, si})});
        }
      }
    }
  }
  return points;
}

// Strict "a beats b": larger expected energy reduction, then smaller spend,
// smaller k, smaller m, smaller mu, smaller sigma.
inline bool better_point(const GridPointResult& a, const GridPointResult& b) {
  const auto key = [](const GridPointResult& r) {
    return std::make_tuple(-r.metrics.expected_energy_reduction, r.metrics.expected_spend,
                           r.point.k, r.point.m, r.point.mu, r.point.sigma);
  };
  return key(a) < key(b);
}

inline std::size_t select_equilibrium(std::span<const GridPointResult> sweep) {
  if (sweep.empty()) throw ConfigError("select_equilibrium: empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (better_point(sweep[i], sweep[best])) best = i;
  }
  return best;
}

inline OfferPolicy policy_at(const StrategyGrid& grid, double mu, double sigma) {
  return {grid.family, mu, sigma, grid.targeting, grid.lognormal_form};
}

inline EquilibriumResult stackelberg_search(const Population& pop, const StrategyGrid& grid,
                                            std::uint64_t base_seed,
                                            EvaluationMode mode = EvaluationMode::expected(),
                                            const PipelineOptions& options = {},
                                            std::size_t workers = 1) {
  const auto points = enumerate_grid(grid, pop.size(), base_seed);
  std::vector<GridPointResult> sweep(points.size());
  parallel_for(points.size(), workers, [&](std::size_t i) {
    const auto& pt = points[i];
    const GameConfig game{pt.k, pt.m, grid.h, grid.budget};
    const auto outcome =
        evaluate_policy(pop, policy_at(grid, pt.mu, pt.sigma), game, pt.seed, mode, options);
    sweep[i] = {pt, outcome.metrics, outcome.realized_switchers};
  });

  const auto& best = sweep[select_equilibrium(sweep)];
  EquilibriumResult eq;
  eq.k_star = best.point.k;
  eq.m_star = best.point.m;
  eq.mu_star = best.point.mu;
  eq.sigma_star = best.point.sigma;
  eq.metrics = best.metrics;
  eq.realized_switchers = best.realized_switchers;
  eq.seed = best.point.seed;

  // Re-run the winning point to recover per-user state.
  const auto outcome = evaluate_policy(pop, policy_at(grid, eq.mu_star, eq.sigma_star),
                                       {eq.k_star, eq.m_star, grid.h, grid.budget},
                                       best.point.seed, mode, options);
  const auto ctx = ResponseContext::of(pop);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto& u = pop[i];
    eq.per_user_bitrates.push_back(u.x_h - outcome.p[i] * u.dx_max);
    const auto cands = binary_candidates(u);
    eq.best_response_bitrates.push_back(
        best_response(u, outcome.h[i], outcome.r_hat[i], cands, ctx));
  }
  eq.acceptance = outcome.p;
  eq.sweep = std::move(sweep);
  return eq;
}

}  // namespace ecostream
