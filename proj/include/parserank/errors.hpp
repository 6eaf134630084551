#pragma once

#include <stdexcept>
#include <string>

namespace parserank {

// Base for every error the library raises. The CLI maps the subclass to
// an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or inconsistent data (exit status 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or arguments (exit status 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or optimizer breakdown (exit status 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace parserank
