#pragma once

#include <stdexcept>
#include <string>

namespace hurdlerank {

// A value lies outside the domain of its loss, or an argument violates a
// documented precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A column cannot be offset or scaled (constant column, single-class binary
// column, all-zero counts, ...).
class DegenerateColumn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative routine failed to converge or produced a non-finite value.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hurdlerank
