#pragma once

#include <stdexcept>
#include <string>

namespace viewrace {

/// Argument outside the mathematical domain of an operation (e.g. x >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs violate an operation's stated preconditions.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContinuityInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OrderViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridInsufficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSeries : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace viewrace
