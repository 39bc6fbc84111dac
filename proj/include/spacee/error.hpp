#pragma once

#include <stdexcept>
#include <string>

namespace spacee {

// Error categories map one-to-one onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments (exit 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing files, malformed input, checksum mismatch (exit 2).
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or solver non-convergence (exit 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace spacee
