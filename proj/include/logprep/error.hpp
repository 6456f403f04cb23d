#pragma once

#include <stdexcept>
#include <string>

namespace logprep {

// Base for every error the library raises. Each subclass maps onto one
// CLI exit code (see cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable file, failed write.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input file is readable but its structure is wrong (missing CSV column,
// malformed row, bad JSON).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration: bad log format, out-of-range parser setting.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A rule catalog violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Prediction and ground truth do not cover the same messages.
class InputMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace logprep
