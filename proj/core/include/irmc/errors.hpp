#pragma once

#include <stdexcept>
#include <string>

namespace irmc {

/// Input violates a documented structural property (non-skew Q, non-binary label, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floating-point failure during sampling or estimation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (datasets, configs, trace files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace irmc
