#pragma once

#include <stdexcept>
#include <string>

namespace isograph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, shapes, label sets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a valid result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace isograph
