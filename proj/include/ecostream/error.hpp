#pragma once

#include <stdexcept>
#include <string>

namespace ecostream {

// Input outside the mathematical domain of a model function (log of a
// non-positive bitrate, negative energy, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration: population, policy, game or scenario settings that
// violate their invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ecostream
