#pragma once

#include <stdexcept>
#include <string>

namespace rbfgen {

// Shape/size mismatch between containers.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Interpolation matrix numerically rank-deficient.
struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or failed numerical invariants at runtime.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File system / serialization failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rbfgen
