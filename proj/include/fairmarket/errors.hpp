#pragma once

#include <stdexcept>
#include <string>

namespace fm {

/// Input violates a model invariant (bad prices, probabilities, dimensions).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation requires a fair market and the market is not fair.
class UnfairMarketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size guard on an exponential-time routine was exceeded.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Numerical or logical failure that should be unreachable on valid input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fm
