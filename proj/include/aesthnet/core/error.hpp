#pragma once

#include <stdexcept>
#include <string>

namespace aesthnet {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing files, undecodable images, failed reads/writes.
class IoError : public Error {
public:
  using Error::Error;
};

/// Data that violates a declared contract (range, shape, row content).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent schema declarations, unknown columns.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Bad pipeline configuration (keys, values, missing paths).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Numeric failures at run time (non-finite loss, degenerate statistics).
class NumericError : public Error {
public:
  using Error::Error;
};

/// Raised when a rank correlation is undefined (constant input).
class UndefinedCorrelationError : public NumericError {
public:
  using NumericError::NumericError;
};

}  // namespace aesthnet
