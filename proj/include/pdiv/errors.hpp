#pragma once

#include <stdexcept>
#include <string>

namespace pdiv {

// Invalid arguments or model parameters (violated preconditions).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to converge or lost accuracy.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration file or schema violation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdiv
