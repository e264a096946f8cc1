#pragma once

#include <stdexcept>
#include <string>

namespace metais {

/// Base of every exception thrown by the library. The message is prefixed
/// with the module that raised it, e.g. "kriging: ...".
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Malformed input: dimension mismatch, non-finite coordinate, bad sizes.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (non-positive length-scale, K > budget, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Correlation matrix could not be factorized even with the largest nugget.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// More regression functions than the design can identify (p > m - 1).
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

/// Slice sampler shrinkage did not find an acceptable point.
class SamplerStall : public Error {
 public:
  using Error::Error;
};

/// Importance-sampling density vanished where the integrand does not.
class DominationError : public Error {
 public:
  using Error::Error;
};

/// Any failure while producing a probability estimate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace metais
