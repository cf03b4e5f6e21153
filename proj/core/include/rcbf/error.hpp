#pragma once

#include <stdexcept>
#include <string>

namespace rcbf {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value or object violates a documented precondition or invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// State-space order outside the supported range (n <= 2).
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

/// jwI - A is singular at the requested frequency.
class SingularResolvent : public Error {
 public:
  using Error::Error;
};

/// Frequency shift moved a pole into the closed right half plane.
class ShiftedInstability : public Error {
 public:
  using Error::Error;
};

/// No first-order bound on the search grid covers the envelope.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, double worst_omega)
      : Error(what), worst_omega_(worst_omega) {}
  double worst_omega() const noexcept { return worst_omega_; }

 private:
  double worst_omega_;
};

/// An iterative solver failed to converge. Distinct from infeasibility,
/// which is reported as a status.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcbf
