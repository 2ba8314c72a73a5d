#pragma once

#include <stdexcept>
#include <string>

namespace cmnb {

// Argument outside the domain of a special function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A distribution parameter violates its constraint; the message names it.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A series needed more terms than the truncation policy allows.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Underflow, overflow or a singular step in an otherwise valid computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncomparableParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ratio-regression needs positive empirical mass at 0, 1, 2 and 3.
class InsufficientSupport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed.
class InvariantBreach : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cmnb
