#pragma once

#include <stdexcept>
#include <string>

namespace zominmax {

/// Invalid configuration: bad dimensions, out-of-range parameters, missing inputs.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The value oracle produced (or was asked to evaluate) something non-finite.
class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zominmax
