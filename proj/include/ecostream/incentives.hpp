#pragma once

// Offer sampling, serious-game reward assignment and acceptance probabilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ecostream/error.hpp"
#include "ecostream/population.hpp"
#include "ecostream/rng.hpp"

namespace ecostream {

enum class OfferFamily { Normal, LogNormal };

enum class Targeting { Random, ByConsumptionDesc };

// How (mu, sigma) map to the lognormal's log-space location nu and scale rho.
// Both use rho^2 = ln(1 + sigma^2 / mu^2).
//   MomentMatched:   nu = ln(mu) - rho^2 / 2  (mean mu, sd sigma)
//   VarianceShifted: nu = ln(mu) - sigma^2 / 2 (mean shrinks as sigma grows)
enum class LogNormalForm { MomentMatched, VarianceShifted };

struct OfferPolicy {
  OfferFamily family = OfferFamily::Normal;
  double mu = 1.0;     // MU
  double sigma = 0.5;  // MU, standard deviation
  Targeting targeting = Targeting::Random;
  LogNormalForm lognormal_form = LogNormalForm::MomentMatched;

  void validate() const {
    if (!(mu > 0.0) || !(sigma >= 0.0)) {
      throw ConfigError("offer policy: need mu > 0 and sigma >= 0");
    }
  }
};

struct GameConfig {
  std::size_t k = 0;
  std::size_t m = 0;
  double h = 0.0;       // MU
  double budget = 0.0;  // MU

  void validate(std::size_t n_users) const {
    if (k + m > n_users) throw ConfigError("game: k + m must not exceed N");
    if (!(h >= 0.0) || !(budget >= 0.0)) {
      throw ConfigError("game: h and budget must be >= 0");
    }
  }
};

enum class Tier : std::int8_t { Bottom = -1, None = 0, Top = 1 };

struct RewardAssignment {
  std::vector<double> h;     // per-user reward, MU
  std::vector<Tier> tier;    // membership; compared to detect fixed points

  static RewardAssignment none(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<Tier>(n, Tier::None)};
  }
};

struct LogNormalParams {
  double location;
  double scale;
};

inline LogNormalParams lognormal_params(double mu, double sigma, LogNormalForm form) {
  const double rho2 = std::log1p((sigma * sigma) / (mu * mu));
  const double shift = form == LogNormalForm::MomentMatched ? 0.5 * rho2
                                                            : 0.5 * sigma * sigma;
  return {std::log(mu) - shift, std::sqrt(rho2)};
}

// Users ordered by baseline consumption, largest first; ties by id.
inline std::vector<std::size_t> order_by_consumption_desc(const Population& pop) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pop[a].x_h > pop[b].x_h;
  });
  return order;
}

inline std::vector<double> sample_offers(const OfferPolicy& policy, const Population& pop,
                                         std::uint64_t seed) {
  policy.validate();
  Rng rng(seed);
  std::vector<double> draws(pop.size());
  if (policy.family == OfferFamily::Normal) {
    for (auto& d : draws) d = std::max(rng.normal(policy.mu, policy.sigma), 0.0);
  } else {
    const auto ln = lognormal_params(policy.mu, policy.sigma, policy.lognormal_form);
    for (auto& d : draws) d = rng.lognormal(ln.location, ln.scale);
  }
  if (policy.targeting == Targeting::Random) return draws;

  std::sort(draws.begin(), draws.end(), std::greater<>());
  std::vector<double> offers(pop.size());
  const auto order = order_by_consumption_desc(pop);
  for (std::size_t i = 0; i < order.size(); ++i) offers[order[i]] = draws[i];
  return offers;
}

// 1 / (1 + exp(-delta (r - r_min))), evaluated without overflow.
inline double acceptance_prob(double r, double r_min, double delta) {
  const double t = delta * (r - r_min);
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Effective incentive is the monetary offer plus the social reward.
inline double acceptance_prob_gamified(double r, double h, double r_min, double delta) {
  return acceptance_prob(r + h, r_min, delta);
}

// Ranks by score (higher is better, ties by ascending id); the first k get
// +h, the last m get -h.
inline RewardAssignment assign_rewards(std::span<const double> scores, std::size_t k,
                                       std::size_t m, double h) {
  const std::size_t n = scores.size();
  if (k + m > n) throw ConfigError("assign_rewards: k + m exceeds population size");
  auto out = RewardAssignment::none(n);
  if (k == 0 && m == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t i = 0; i < k; ++i) {
    out.h[order[i]] = h;
    out.tier[order[i]] = Tier::Top;
  }
  for (std::size_t i = n - m; i < n; ++i) {
    out.h[order[i]] = -h;
    out.tier[order[i]] = Tier::Bottom;
  }
  return out;
}

// What the public leaderboard ranks on. Higher score = better rank.
enum class RankingKey {
  ExpectedReduction,    // p_n * dE_n
  ExpectedConsumption,  // -(P0 + alpha (x_h - p_n dx_n))
  BaselineConsumption,  // -(P0 + alpha x_h)
};

inline std::vector<double> ranking_scores(RankingKey key, const Population& pop,
                                          std::span<const double> p) {
  std::vector<double> scores(pop.size());
  const auto& c = pop.consts();
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto& u = pop[i];
    switch (key) {
      case RankingKey::ExpectedReduction:
        scores[i] = p[i] * u.de_max;
        break;
      case RankingKey::ExpectedConsumption:
        scores[i] = -session_energy(u.x_h - p[i] * u.dx_max, c);
        break;
      case RankingKey::BaselineConsumption:
        scores[i] = -session_energy(u.x_h, c);
        break;
    }
  }
  return scores;
}

inline std::vector<double> acceptance_probs(const Population& pop,
                                            std::span<const double> offers,
                                            std::span<const double> h) {
  std::vector<double> p(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    p[i] = acceptance_prob_gamified(offers[i], h[i], pop[i].r_min, pop[i].delta);
  }
  return p;
}

inline double total_expected_reduction(const Population& pop, std::span<const double> p) {
  double total = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) total += p[i] * pop[i].de_max;
  return total;
}

struct FixedPointResult {
  RewardAssignment rewards;
  std::vector<double> p;
  std::size_t rounds = 0;
  bool cycle = false;
};

// Ranking depends on acceptance and acceptance depends on the ranking. Start
// from reward-free probabilities, then alternate rank -> assign -> recompute
// until the membership repeats. A 2-cycle resolves to the state with the
// larger total expected reduction.
template <typename ScoreFn>
FixedPointResult resolve_rewards_fixed_point(const Population& pop,
                                             std::span<const double> offers, std::size_t k,
                                             std::size_t m, double h, std::size_t max_rounds,
                                             ScoreFn&& score) {
  if (max_rounds < 1) throw ConfigError("fixed point: max_rounds must be >= 1");
  if (offers.size() != pop.size()) throw ConfigError("fixed point: offers size mismatch");

  struct State {
    RewardAssignment rewards;
    std::vector<double> p;
  };
  State prev{RewardAssignment::none(pop.size()), {}};
  prev.p = acceptance_probs(pop, offers, prev.rewards.h);
  State before_prev{};
  bool have_before_prev = false;

  for (std::size_t round = 1; round <= max_rounds; ++round) {
    const std::vector<double> scores = score(pop, std::span<const double>(prev.p));
    State next{assign_rewards(scores, k, m, h), {}};
    next.p = acceptance_probs(pop, offers, next.rewards.h);

    if (next.rewards.tier == prev.rewards.tier) {
      return {std::move(next.rewards), std::move(next.p), round, false};
    }
    if (have_before_prev && next.rewards.tier == before_prev.rewards.tier) {
      const bool keep_next =
          total_expected_reduction(pop, next.p) >= total_expected_reduction(pop, prev.p);
      State& pick = keep_next ? next : prev;
      return {std::move(pick.rewards), std::move(pick.p), round, true};
    }
    before_prev = std::move(prev);
    have_before_prev = true;
    prev = std::move(next);
  }
  return {std::move(prev.rewards), std::move(prev.p), max_rounds, false};
}

inline FixedPointResult resolve_rewards_fixed_point(const Population& pop,
                                                    std::span<const double> offers,
                                                    std::size_t k, std::size_t m, double h,
                                                    std::size_t max_rounds = 20,
                                                    RankingKey key = RankingKey::BaselineConsumption) {
  return resolve_rewards_fixed_point(
      pop, offers, k, m, h, max_rounds,
      [key](const Population& p, std::span<const double> probs) {
        return ranking_scores(key, p, probs);
      });
}

}  // namespace ecostream
