#pragma once

#include <stdexcept>
#include <string>

namespace fairsplit {

// Error families map onto the CLI exit codes: usage/validation -> 1,
// data/format -> 2, capacity/infeasibility -> 3.

// Structurally malformed inputs: bad config values, malformed LP instances.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed files carrying bad data: missing columns, duplicate ids,
// unknown references.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cohort cell is too small for the requested draw, or a scenario model
// turned out infeasible.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Optimisation left the finite domain.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fairsplit
