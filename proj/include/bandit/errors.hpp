#pragma once

#include <stdexcept>
#include <string>

namespace bandit {

// Shape or dimension mismatch between operands.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Index outside a valid range (token id, embedding row, sentence id).
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Argument outside a function's mathematical domain (e.g. log of x <= 0).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Violated precondition of an operation.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-finite value where a finite one is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent serialized data.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration key or value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration exceeds its size guard.
struct SizeError : std::length_error {
  using std::length_error::length_error;
};

}  // namespace bandit
