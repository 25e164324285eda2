#pragma once

#include <stdexcept>
#include <string>

namespace prd {

// Invalid configuration (bad keys, out-of-range hyperparameters, uncollectible food, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse such as stepping a finished episode.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Shape or dimension mismatch between collaborating components.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite losses, ratios or gradients during an update.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace prd
