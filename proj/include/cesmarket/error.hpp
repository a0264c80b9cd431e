#pragma once

#include <stdexcept>
#include <string>

namespace cesmarket {

// Malformed or invalid user input (instance files, CLI arguments).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solve stopped on a node/time limit before certifying optimality.
class SolverLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver failure that is not a limit (infeasible model that should be
// feasible, numerical breakdown).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reconciliation of cost components failed; indicates a formulation bug.
class AccountingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output bundle could not be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cesmarket
