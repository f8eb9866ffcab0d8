#pragma once

// Synthetic user populations.
//
// Each user draws, in this order and from one seeded stream: high bitrate,
// low bitrate, greenness factor, sigmoid slope. Users are drawn in id order.
// Singleton bitrate sets still consume a draw, so two configs differing only
// in their bitrate sets produce users with identical gamma and delta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <span>
#include <vector>

#include "ecostream/error.hpp"
#include "ecostream/model.hpp"
#include "ecostream/rng.hpp"

namespace ecostream {

struct Interval {
  double lo;
  double hi;
};

struct UserProfile {
  std::size_t id = 0;
  double x_h = 0.0;     // kbps
  double x_l = 0.0;     // kbps
  double gamma = 1.0;
  double delta = 1.0;   // per MU
  double r_min = 0.0;   // MU
  double s = 0.0;       // bill savings, MU
  double du = 0.0;      // utility loss of the green action
  double dx_max = 0.0;  // kbps
  double de_max = 0.0;  // W
};

struct PopulationConfig {
  std::size_t n_users = 1000;
  std::vector<double> high_set{2000, 3000, 4000, 5000};
  std::vector<double> low_set{300, 600, 1200, 1500};
  Interval gamma_range{1.0, 5.0};
  Interval delta_range{1.0, 10.0};
  double lambda_mu = 10.0;     // MU per utility unit
  double energy_price = 0.0;   // MU per W saved
  std::uint64_t seed = 1;
  ModelConstants consts{};

  void validate() const {
    consts.validate();
    if (n_users < 1) throw ConfigError("population: n_users must be >= 1");
    if (high_set.empty() || low_set.empty()) {
      throw ConfigError("population: bitrate sets must be non-empty");
    }
    const double max_low = *std::max_element(low_set.begin(), low_set.end());
    const double min_high = *std::min_element(high_set.begin(), high_set.end());
    const double min_low = *std::min_element(low_set.begin(), low_set.end());
    if (!(max_low < min_high)) {
      throw ConfigError("population: every low bitrate must be below every high bitrate");
    }
    if (!(min_low > 0.0)) throw ConfigError("population: bitrates must be positive");
    const double gamma_cap = consts.x_max / consts.x_min;
    if (!(gamma_range.lo >= 1.0 && gamma_range.lo <= gamma_range.hi &&
          gamma_range.hi < gamma_cap)) {
      std::ostringstream os;
      os << "population: gamma_range must lie in [1, " << gamma_cap << ")";
      throw ConfigError(os.str());
    }
    if (!(delta_range.lo > 0.0 && delta_range.lo <= delta_range.hi)) {
      throw ConfigError("population: delta_range must be positive and ordered");
    }
    if (!(lambda_mu >= 0.0) || !(energy_price >= 0.0)) {
      throw ConfigError("population: lambda_mu and energy_price must be >= 0");
    }
  }
};

struct PopulationTotals {
  double baseline_traffic = 0.0;  // sum x_h, kbps
  double baseline_energy = 0.0;   // sum P0 + alpha x_h, W
  double min_traffic = 0.0;       // sum x_l, kbps
};

class Population {
 public:
  Population(std::vector<UserProfile> users, PopulationConfig config)
      : users_(std::move(users)), config_(std::move(config)) {
    for (const auto& u : users_) {
      totals_.baseline_traffic += u.x_h;
      totals_.baseline_energy += session_energy(u.x_h, config_.consts);
      totals_.min_traffic += u.x_l;
    }
  }

  std::span<const UserProfile> users() const { return users_; }
  const UserProfile& operator[](std::size_t i) const { return users_[i]; }
  std::size_t size() const { return users_.size(); }
  const ModelConstants& consts() const { return config_.consts; }
  const PopulationConfig& config() const { return config_; }
  const PopulationTotals& totals() const { return totals_; }

  // 1 - sum x_l / sum x_h.
  double max_traffic_reduction_fraction() const {
    return 1.0 - totals_.min_traffic / totals_.baseline_traffic;
  }

 private:
  std::vector<UserProfile> users_;
  PopulationConfig config_;
  PopulationTotals totals_;
};

inline double min_incentive(double du, double s, double lambda_mu) {
  return std::max(lambda_mu * du - s, 0.0);
}

inline Population generate(const PopulationConfig& config) {
  config.validate();
  const auto& c = config.consts;
  Rng rng(config.seed);
  std::vector<UserProfile> users(config.n_users);
  for (std::size_t i = 0; i < config.n_users; ++i) {
    auto& u = users[i];
    u.id = i;
    u.x_h = rng.pick(std::span<const double>(config.high_set));
    u.x_l = rng.pick(std::span<const double>(config.low_set));
    u.gamma = rng.uniform(config.gamma_range.lo, config.gamma_range.hi);
    u.delta = rng.uniform(config.delta_range.lo, config.delta_range.hi);
    u.du = delta_utility(u.x_h, u.x_l, u.gamma, c);
    u.dx_max = u.x_h - u.x_l;
    u.de_max = energy_reduction(u.x_h, u.x_l, c);
    u.s = config.energy_price * u.de_max;
    u.r_min = min_incentive(u.du, u.s, config.lambda_mu);
  }
  return Population(std::move(users), config);
}

inline double total_min_incentive(const Population& pop) {
  double total = 0.0;
  for (const auto& u : pop.users()) total += u.r_min;
  return total;
}

// Finds lambda_mu so that the generated population's sum of r_min lands
// within `tolerance` of `target_total`. The sum is continuous and
// non-decreasing in lambda_mu, so bisection converges.
inline double calibrate_lambda(const PopulationConfig& config, double target_total,
                               double tolerance) {
  if (!(target_total >= 0.0) || !(tolerance > 0.0)) {
    throw ConfigError("calibrate_lambda: need target >= 0 and tolerance > 0");
  }
  PopulationConfig probe = config;
  probe.lambda_mu = 0.0;
  const Population base = generate(probe);

  auto total_at = [&](double lambda) {
    double t = 0.0;
    for (const auto& u : base.users()) t += min_incentive(u.du, u.s, lambda);
    return t;
  };

  // Largest lambda at which every r_min still clamps to zero.
  double lambda_zero = std::numeric_limits<double>::infinity();
  for (const auto& u : base.users()) {
    if (u.du > 0.0) lambda_zero = std::min(lambda_zero, u.s / u.du);
  }
  if (!std::isfinite(lambda_zero)) {
    if (target_total <= tolerance) return 0.0;
    throw ConfigError(
        "calibrate_lambda: target unreachable, every user has zero utility loss "
        "(achievable range [0, 0])");
  }
  if (target_total <= tolerance) return lambda_zero;

  double lo = lambda_zero;
  double hi = std::max(1.0, 2.0 * lambda_zero);
  while (total_at(hi) < target_total) {
    hi *= 2.0;
    if (hi > 1e12) {
      throw ConfigError("calibrate_lambda: target unreachable below lambda = 1e12");
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double t = total_at(mid);
    if (std::abs(t - target_total) <= tolerance) return mid;
    (t < target_total ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ecostream
