#pragma once

#include <stdexcept>

namespace levy_ou {

/// Inputs that violate a documented precondition or invariant.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not produce a finite result.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levy_ou
