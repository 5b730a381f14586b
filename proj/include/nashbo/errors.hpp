#pragma once

#include <stdexcept>
#include <string>

namespace nashbo {

/// Invalid game/experiment configuration (cap exceeded, empty feasible set,
/// malformed config file, failed validation).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A surrogate model whose kernel matrix could not be factorized even after
/// the jitter schedule was exhausted.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal contract violation, e.g. consuming an undefined bound entry.
class LogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace nashbo
