#pragma once

#include <stdexcept>
#include <string>

namespace spreadpool {

// Invalid configuration: bad grid spec, bad camera, bad k, shape mismatch.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside an operation's domain (depth <= 0, index out of range, log of 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite input values or degenerate geometry.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spreadpool
