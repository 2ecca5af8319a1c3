#pragma once

#include <stdexcept>
#include <string>

namespace rnagg {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input (sequence, dot-bracket, parameter file, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (unknown strategy, inconsistent options, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rnagg
