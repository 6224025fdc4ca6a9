#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace shapelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs violate an operation's contract (grid mismatch, bad parameter,
/// incompatible extension, negative time, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on the *shape* of the input failed. Carries the
/// grid location where it failed.
class PreconditionFailure : public Error {
 public:
  PreconditionFailure(const std::string& what, double witness_x,
                      std::optional<double> witness_y = std::nullopt)
      : Error(what), witness_x_(witness_x), witness_y_(witness_y) {}

  double witness_x() const { return witness_x_; }
  std::optional<double> witness_y() const { return witness_y_; }

 private:
  double witness_x_;
  std::optional<double> witness_y_;
};

/// A series or iteration did not reach its stopping criterion.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration rejected before any computation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapelab
