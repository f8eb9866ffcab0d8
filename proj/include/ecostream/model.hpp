#pragma once

// Closed-form QoE, utility, energy and carbon mathematics.
//
// Units: bitrates in kbps, power in W, one session lasts one time unit so a
// session's energy is numerically equal to its power.

#include <algorithm>
#include <cmath>
#include <string>

#include "ecostream/error.hpp"

namespace ecostream {

struct ModelConstants {
  double x_min = 300.0;    // kbps
  double x_max = 20000.0;  // kbps
  double p0 = 10.0;        // static power, W
  double alpha = 0.2;      // dynamic power, W per kbps
  double eta = 0.388;      // gCO2 per kWh
  double mos_lo = 1.0;
  double mos_hi = 5.0;

  void validate() const {
    if (!(x_min > 0.0 && x_min < x_max)) {
      throw ConfigError("model constants: need 0 < x_min < x_max");
    }
    if (!(p0 >= 0.0) || !(alpha > 0.0) || !(eta > 0.0)) {
      throw ConfigError("model constants: need p0 >= 0, alpha > 0, eta > 0");
    }
  }
};

struct Mos {
  double value;
};

struct Utility {
  double value;
};

// Greenness-adjusted logarithmic QoE curve before clamping. Equals 1 at x_min
// and 5 at x_max / gamma.
inline double mos_unclamped(double x, double gamma, const ModelConstants& c) {
  if (!(x > 0.0) || !(c.x_min > 0.0)) {
    throw DomainError("mos: bitrate and x_min must be positive");
  }
  if (!(gamma >= 1.0)) {
    throw DomainError("mos: greenness factor must be >= 1");
  }
  const double satisfied_max = c.x_max / gamma;
  if (!(satisfied_max > c.x_min)) {
    throw DomainError("mos: x_max / gamma must exceed x_min");
  }
  const double span = std::log(satisfied_max) - std::log(c.x_min);
  const double slope = (c.mos_hi - c.mos_lo) / span;
  return c.mos_lo + slope * (std::log(x) - std::log(c.x_min));
}

// Clamped to [mos_lo, mos_hi]: a user is fully satisfied at x_max / gamma.
inline Mos mos(double x, double gamma, const ModelConstants& c) {
  return {std::clamp(mos_unclamped(x, gamma, c), c.mos_lo, c.mos_hi)};
}

inline Utility utility(double x, double gamma, const ModelConstants& c) {
  return {mos(x, gamma, c).value / c.mos_hi};
}

inline double delta_utility(double x_high, double x_low, double gamma,
                            const ModelConstants& c) {
  if (!(x_low < x_high)) {
    throw DomainError("delta_utility: need x_low < x_high");
  }
  return utility(x_high, gamma, c).value - utility(x_low, gamma, c).value;
}

inline double session_energy(double x, const ModelConstants& c) {
  if (!(x >= 0.0)) throw DomainError("session_energy: negative bitrate");
  return c.p0 + c.alpha * x;
}

// P0 cancels, so the reduction depends only on alpha.
inline double energy_reduction(double x_high, double x, const ModelConstants& c) {
  if (!(x <= x_high)) throw DomainError("energy_reduction: need x <= x_high");
  return c.alpha * (x_high - x);
}

inline double bitrate_from_energy(double energy, const ModelConstants& c) {
  if (!(energy >= c.p0)) {
    throw DomainError("bitrate_from_energy: energy below static power");
  }
  return (energy - c.p0) / c.alpha;
}

// energy in W·h; eta is per kWh.
inline double co2(double energy_wh, const ModelConstants& c) {
  return c.eta * energy_wh / 1000.0;
}

// Utility lost when a user at x_high cuts its session energy by delta_e.
inline double delta_u_of_delta_e(double delta_e, double x_high, double gamma,
                                 const ModelConstants& c) {
  if (!(delta_e >= 0.0) || delta_e > c.alpha * x_high) {
    throw DomainError("delta_u_of_delta_e: need 0 <= delta_e <= alpha * x_high");
  }
  if (delta_e == 0.0) return 0.0;
  const double x_reduced = x_high - delta_e / c.alpha;
  return utility(x_high, gamma, c).value - utility(x_reduced, gamma, c).value;
}

}  // namespace ecostream
