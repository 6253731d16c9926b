#pragma once

#include <stdexcept>
#include <string>

namespace gradvar {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, dimension mismatches, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered, or an iterative solver failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An exponent would exceed the representable range.
class MagnitudeOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An external hint stream ran out of entries.
class StreamError : public Error {
 public:
  using Error::Error;
};

/// Malformed transcript or config text.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace gradvar
