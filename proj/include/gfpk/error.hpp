#pragma once

#include <stdexcept>
#include <string>

namespace gfpk {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested object (basis, grid) would exceed a configured size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed root finding, quadrature that did not converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A drift violated its declared bound.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Singular or ill-conditioned Galerkin system.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Truncated density too negative to be read as a measure.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

class DiscretizationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfpk
