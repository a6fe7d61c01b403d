#pragma once

#include <stdexcept>
#include <string>

namespace smartexam {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration, schema violation, or design-constraint breach
/// detected before (or while validating) execution. CLI maps these to exit 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Column/row schema mismatch in a dataset or model file.
class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Design parameters violate a feasibility constraint (e.g. epsilon above the
/// largest value the realized capacities admit).
class InvalidDesignError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Rank-deficient or under-sized regression problem.
class FitError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Runtime failure during execution (CLI exit 3).
class RuntimeError : public Error {
 public:
  using Error::Error;
};

/// No trajectory carries positive weight for the requested regime.
class NoSupportError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

}  // namespace smartexam
