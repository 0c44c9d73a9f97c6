#pragma once

#include <stdexcept>
#include <string>

namespace tecopt {

/// Configuration file or parameter-validation problem.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Solver breakdown: exhausted root bracket, singular system, non-finite cost.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tecopt
