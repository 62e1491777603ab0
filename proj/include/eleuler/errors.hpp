#pragma once

#include <stdexcept>
#include <string>

namespace eleuler {

/// Invalid or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fields with incompatible dimension, grid size or component count.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: CFL violation, NaN, non-contraction (CLI exit code 2).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time step too large for the advecting velocity.
class CflError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// File system or checkpoint format failure (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eleuler
