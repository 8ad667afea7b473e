#pragma once

#include <stdexcept>
#include <string>

namespace bifid {

/// Invalid caller-supplied value (sizes, ranges, names, empty inputs).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input matrix width/height does not match what a network expects.
class InputShapeError : public ArgumentError {
public:
  using ArgumentError::ArgumentError;
};

/// An operation was called on an object that is not in the required state.
class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, long epoch = -1)
      : std::runtime_error(what), epoch_(epoch) {}
  long epoch() const noexcept { return epoch_; }

private:
  long epoch_;
};

/// Factorization failure (non positive-definite covariance after jitter).
class LinearAlgebraError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown configuration content.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, written or parsed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace bifid
