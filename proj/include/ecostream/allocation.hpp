#pragma once

// Budget-constrained incentive allocation and outcome metrics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ecostream/error.hpp"
#include "ecostream/incentives.hpp"
#include "ecostream/model.hpp"
#include "ecostream/population.hpp"

namespace ecostream {

struct OutcomeMetrics {
  double expected_traffic_reduction = 0.0;  // kbps
  double traffic_reduction_pct = 0.0;       // % of sum x_h
  double expected_energy_reduction = 0.0;   // W
  double expected_co2_reduction = 0.0;      // g
  double expected_spend = 0.0;              // MU
  double admin_cost = 0.0;                  // MU, outside the budget constraint
  double expected_switchers = 0.0;          // sum p
  double budget = 0.0;                      // MU
};

inline double expected_spend(std::span<const double> p, std::span<const double> r) {
  if (p.size() != r.size()) throw ConfigError("expected_spend: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * r[i];
  return total;
}

// Funding order: efficiency dE/r descending (r = 0 is free, so infinitely
// efficient), then larger dE, then ascending id.
inline std::vector<std::size_t> efficiency_order(std::span<const double> r,
                                                 std::span<const double> de) {
  const std::size_t n = r.size();
  std::vector<double> eff(n);
  for (std::size_t i = 0; i < n; ++i) {
    eff[i] = r[i] > 0.0 ? de[i] / r[i] : std::numeric_limits<double>::infinity();
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (eff[a] != eff[b]) return eff[a] > eff[b];
    return de[a] > de[b];
  });
  return order;
}

// Greedy allocation. `accept(j, r)` is user j's acceptance probability at
// offer r; p[j] must equal accept(j, r[j]).
//
// If the expected spend of the sampled offers fits the budget they are kept.
// Otherwise the longest prefix of the efficiency order that fits is funded in
// full, and every remaining user gets an equal share of the leftover expected
// spend: r_hat solves accept(j, r_hat) * r_hat = share, capped at r[j].
template <typename AcceptFn>
std::vector<double> allocate_budget(std::span<const double> r, std::span<const double> p,
                                    std::span<const double> de, double budget,
                                    AcceptFn&& accept) {
  const std::size_t n = r.size();
  if (p.size() != n || de.size() != n) throw ConfigError("allocate_budget: length mismatch");
  if (!(budget >= 0.0)) throw ConfigError("allocate_budget: negative budget");

  if (expected_spend(p, r) <= budget) return {r.begin(), r.end()};

  std::vector<double> r_hat(n, 0.0);
  const auto order = efficiency_order(r, de);
  double spent = 0.0;
  std::size_t funded = 0;
  for (; funded < n; ++funded) {
    const std::size_t j = order[funded];
    const double cost = p[j] * r[j];
    if (spent + cost > budget) break;
    spent += cost;
    r_hat[j] = r[j];
  }
  if (funded == n) return r_hat;

  const double share = (budget - spent) / static_cast<double>(n - funded);
  for (std::size_t idx = funded; idx < n; ++idx) {
    const std::size_t j = order[idx];
    if (p[j] * r[j] <= share) {
      r_hat[j] = r[j];
      continue;
    }
    // accept(j, x) * x is strictly increasing in x; keep the feasible end.
    double lo = 0.0;
    double hi = r[j];
    for (int iter = 0; iter < 64; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (accept(j, mid) * mid <= share ? lo : hi) = mid;
    }
    r_hat[j] = lo;
  }
  return r_hat;
}

// Acceptance probabilities held fixed, independent of the offer.
inline std::vector<double> allocate_budget(std::span<const double> r,
                                           std::span<const double> p,
                                           std::span<const double> de, double budget) {
  return allocate_budget(r, p, de, budget,
                         [p](std::size_t j, double) { return p[j]; });
}

inline OutcomeMetrics evaluate_outcome(const Population& pop, std::span<const double> r_hat,
                                       std::span<const double> p_final,
                                       std::span<const double> x_target, double budget,
                                       double admin_rate) {
  const std::size_t n = pop.size();
  if (r_hat.size() != n || p_final.size() != n || x_target.size() != n) {
    throw ConfigError("evaluate_outcome: length mismatch");
  }
  const auto& c = pop.consts();
  OutcomeMetrics out;
  out.budget = budget;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = pop[i];
    out.expected_traffic_reduction += p_final[i] * (u.x_h - x_target[i]);
    out.expected_energy_reduction += p_final[i] * energy_reduction(u.x_h, x_target[i], c);
    out.expected_spend += p_final[i] * r_hat[i];
    out.expected_switchers += p_final[i];
  }
  out.traffic_reduction_pct =
      100.0 * out.expected_traffic_reduction / pop.totals().baseline_traffic;
  out.expected_co2_reduction = co2(out.expected_energy_reduction, c);
  out.admin_cost = admin_rate * out.expected_switchers;
  return out;
}

}  // namespace ecostream
