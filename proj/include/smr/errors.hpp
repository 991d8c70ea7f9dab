#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace smr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, parameters, or preconditions (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Fields or operators defined on incompatible grids.
class GridMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A trajectory crossed the divergence guard (maps to CLI exit code 3).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double t) : Error(what), time(t) {}
  double time = 0.0;
};

/// Projection onto the manifold failed or left its domain (maps to CLI exit code 4).
class TubeExitError : public Error {
 public:
  TubeExitError(const std::string& what, double t) : Error(what), time(t) {}
  double time = 0.0;
};

/// The A matrix lost invertibility; carries the offending parameter point.
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, std::vector<double> at)
      : Error(what), h(std::move(at)) {}
  std::vector<double> h;
};

/// A coupled run was started from a state violating the orthogonality constraint.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Requested operation is not defined for the given object (e.g. multi-parameter
/// Stratonovich-to-Ito conversion without a diffusion derivative).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Self-verification suite failed (maps to CLI exit code 5).
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace smr
