#pragma once

#include <stdexcept>
#include <string>

namespace shellfem {

/// Base class for every error raised by the library. The `exit_code()` is
/// what the command line driver returns when the error escapes a study.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad configuration, bad expression, out-of-range parameters.
class ConfigError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Expression syntax error. `offset` is the byte offset of the offending token.
class ParseError : public ConfigError {
public:
  ParseError(const std::string& what, std::size_t offset)
      : ConfigError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Evaluation outside the domain of a function (log of a negative number...).
class DomainError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class GeometryError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class MeshError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class SolverError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace shellfem
