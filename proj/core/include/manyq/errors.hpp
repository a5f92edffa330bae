#pragma once

#include <stdexcept>
#include <string>

namespace manyq {

/// Malformed or inconsistent scenario configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running a well-formed scenario: event cap hit, non-finite
/// solver state, IO failure (CLI exit code 3).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace manyq
