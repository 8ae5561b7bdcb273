#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modlab {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent or invalid configuration (grids, scenarios, modulators).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Configuration text that could not be parsed; carries the 1-based line.
class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Argument outside the domain an operation supports.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Sampling grid too coarse or too short for the requested quantity.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace modlab
