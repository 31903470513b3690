#pragma once

#include <stdexcept>
#include <string>

namespace specgrid {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: scenario/config documents, flags, presets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape disagreement between a network, a state vector, or a checkpoint.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace specgrid
