// Minimal library walk-through: build a population, evaluate one policy,
// then let the provider search its strategy grid.

#include <cstdio>

#include "ecostream/game.hpp"
#include "ecostream/population.hpp"

int main() {
  using namespace ecostream;

  PopulationConfig pc;
  pc.seed = 7;
  pc.lambda_mu = calibrate_lambda(pc, 2268.0, 1e-6);
  const Population pop = generate(pc);
  std::printf("users=%zu  lambda=%.4f  sum r_min=%.1f MU  max reduction=%.1f%%\n", pop.size(),
              pc.lambda_mu, total_min_incentive(pop),
              100.0 * pop.max_traffic_reduction_fraction());

  const OfferPolicy offers{OfferFamily::Normal, 1.0, 0.5};
  for (auto [k, m] : {std::pair{0, 0}, std::pair{200, 10}}) {
    const GameConfig game{static_cast<std::size_t>(k), static_cast<std::size_t>(m), 1000.0,
                          3000.0};
    const auto out = evaluate_policy(pop, offers, game, derive_seed(pc.seed, {0}));
    std::printf("K=%3d M=%3d  traffic -%.2f%%  energy -%.1f kW  spend %.1f MU\n", k, m,
                out.metrics.traffic_reduction_pct, out.metrics.expected_energy_reduction / 1000.0,
                out.metrics.expected_spend);
  }

  StrategyGrid grid;
  grid.budget = 1.0;
  const auto eq = stackelberg_search(pop, grid, pc.seed);
  std::printf("leader optimum: K=%zu M=%zu mu=%g sigma=%g  energy -%.1f kW  switchers %.0f\n",
              eq.k_star, eq.m_star, eq.mu_star, eq.sigma_star,
              eq.metrics.expected_energy_reduction / 1000.0, eq.realized_switchers);
}
