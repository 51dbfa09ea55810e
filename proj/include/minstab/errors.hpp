#pragma once

#include <stdexcept>
#include <string>

namespace minstab {

/// Invalid user-supplied configuration (grid bounds, constants, config files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sampled data is unusable, e.g. a non-finite function value.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called before its inputs were computed.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerically computed field violates an invariant it must satisfy.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is degenerate for the requested quantity (e.g. zero L2 norm).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The flow produced non-finite values or diverged.
class BlowUpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace minstab
