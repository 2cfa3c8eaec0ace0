#pragma once

#include <stdexcept>
#include <string>

namespace lrbms {

/// Invalid geometry, penalty, or config input.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parameter outside the admissible box.
struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Solver non-convergence, singular system, stagnation.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension caps exceeded (dense oracles, transfer matrix).
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lrbms
