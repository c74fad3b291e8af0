#pragma once

#include <stdexcept>
#include <string>

namespace steuler {

/// Density reached a non-positive value (upstream transport failure).
struct NonPositiveDensity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap.
struct NoConvergence : std::runtime_error {
  NoConvergence(const std::string& what, double achieved) : std::runtime_error(what), residual(achieved) {}
  double residual;
};

/// Pressure right-hand side with a non-negligible mean.
struct IncompatibleRhs : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A characteristic foot became non-finite.
struct CharacteristicBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two runs or fields do not share grid and time grid.
struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace steuler
