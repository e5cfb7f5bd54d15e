#pragma once

#include <stdexcept>
#include <string>

namespace msic {

/// Base for all library errors. Subclasses map to CLI exit codes:
/// config/validation/parse/parameter -> 1, numeric/runtime -> 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shape or length mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a schema or vocabulary constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed; message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to an operation (bad strategy, horizon < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value or other numeric failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace msic
