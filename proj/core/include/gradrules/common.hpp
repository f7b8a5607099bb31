#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gradrules {

using FeatureIndex = std::uint32_t;
using ClassIndex = std::size_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system or parse failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gradrules
