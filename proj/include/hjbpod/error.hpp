#pragma once

#include <stdexcept>
#include <string>

namespace hjbpod {

// Base of all errors raised by the library. The CLI maps the subclasses onto
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or violated precondition on user input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Blow-up, nonconvergence, singular matrices.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated artifact file, or a header version mismatch.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace hjbpod
