#pragma once

#include <stdexcept>
#include <string>

namespace loopmass {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two points coincide where a pair of distinct points is required.
class DegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Gamma / digamma evaluated at a non-positive integer.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Hypergeometric series at unit argument without positive parameter excess.
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Parameter combination that no implemented evaluation path covers
/// (e.g. an integer c-a-b in the 2F1 connection formula).
class UnsupportedParametersError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Invalid Monte Carlo or CLI configuration.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A geometric predicate could not be decided at the requested resolution.
class IndeterminateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Series or quadrature failed to reach the requested tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace loopmass
