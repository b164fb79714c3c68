#pragma once

#include <stdexcept>
#include <string>

namespace bhtbp {

/// Invalid model or algorithm parameter (non-finite, out of range, infeasible).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed configuration, file, or CLI input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between vectors, graphs, and supports.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: failed factorization, quadrature, or root bracketing.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A message or posterior lost all of its mass.
class DegenerateMessageError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The likelihood ratio never reaches the detection threshold.
class NoThresholdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace bhtbp
