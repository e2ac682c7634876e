#pragma once

#include <stdexcept>
#include <string>

namespace metacausal {

// Precondition violated by a caller-supplied argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An environment state outside the model's state space.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Weighted L1 fit with no spread in the regressor.
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No machine state reproduces the observed trace.
class NoConsistentState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace metacausal
