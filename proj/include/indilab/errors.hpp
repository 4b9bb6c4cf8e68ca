#pragma once

#include <stdexcept>
#include <string>

namespace indilab {

/// Invalid or inconsistent configuration / construction input.
/// CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Model construction or evaluation rejected (singular inertia, non-finite
/// inputs, violated structural assumptions).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A requested matrix inversion is numerically unsafe. Carries a condition
/// number estimate so the caller can report why the inversion was refused.
class InversionError : public std::runtime_error {
 public:
  InversionError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition(condition_estimate) {}
  double condition;  // spectral condition number estimate [-]
};

/// Runtime failure inside a simulation (divergence, envelope violation in
/// strict mode, mid-run inversion failure). Carries the failing time.
/// CLI maps this to exit code 3.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double t_fail)
      : std::runtime_error(what), t(t_fail) {}
  double t;  // simulation time at failure [s]
};

}  // namespace indilab
