#pragma once

#include <stdexcept>
#include <string>

namespace rlz {

// Invalid user input: bad dimensions, out-of-range hyperparameters, malformed files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The LP solver could not certify an optimum (cycling guard, numerical breakdown,
// or an infeasibility that should be impossible for the problem class).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An exact oracle would exceed its combinatorial budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlz
