#pragma once

#include <stdexcept>
#include <string>

namespace advrom {

// Error taxonomy; the CLI maps these onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or CLI usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File parsing, missing artifacts, malformed headers.
class IoError : public Error {
 public:
  using Error::Error;
};

// Shape mismatches and out-of-range arguments.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward before forward.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace advrom
