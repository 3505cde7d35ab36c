#pragma once

#include <stdexcept>
#include <string>

namespace planarcav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category, used in CLI error records.
  virtual const char* kind() const noexcept { return "error"; }
};

class RangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "range"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class NumericalDegeneracy : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical_degeneracy"; }
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported_configuration"; }
};

class QuadratureError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "quadrature"; }
};

class InsufficientData : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "insufficient_data"; }
};

}  // namespace planarcav
