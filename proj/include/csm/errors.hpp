#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition was violated (e.g. a start point outside its box).
class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Factorisations, trajectory solvers and similar numerical failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double estimate, double error_estimate);
  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// Malformed user input (configuration files, CSV data).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The operation is not defined for this kind of chain or model.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Failure inside a Gibbs sweep; carries the iteration it happened at.
class SamplerError : public Error {
 public:
  SamplerError(const std::string& what, long iteration);
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace csm
