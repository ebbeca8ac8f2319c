#pragma once

#include <stdexcept>
#include <string>

namespace offload {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset, report, model or trace file. Messages carry the line number when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input vector width does not match what a fitted model expects.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace offload
