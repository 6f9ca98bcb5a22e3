#pragma once

#include <stdexcept>
#include <string>

namespace avgbound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (precondition failure).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The ODE integrator could not advance: step budget exhausted, or a
/// non-finite right-hand side that step reduction could not avoid.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// An iterative procedure (quadrature refinement, contraction iteration)
/// did not reach its tolerance within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace avgbound
