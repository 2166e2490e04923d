#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace txmotif {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A required column is missing or the column mapping is inconsistent.
class SchemaError : public Error {
public:
  using Error::Error;
};

// A single input row could not be parsed. Carries the 1-based line number.
class RowError : public Error {
public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// The dataset as a whole violates an invariant (e.g. duplicate ids).
class DatasetError : public Error {
public:
  using Error::Error;
};

// Graph structure violation: self-loop, duplicate edge, unknown node.
class StructuralError : public Error {
public:
  using Error::Error;
};

// Invalid configuration or incompatible inputs.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Filesystem-level failure.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace txmotif
