#pragma once

#include <stdexcept>
#include <string>

namespace csnk {

/// Raised for arithmetic outside a function's domain (division by zero,
/// bicomplex zero divisors, log of a non-positive real part, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A function or network produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched tensor, parameter or batch shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite directional derivatives or optimizer quantities.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset file. The message carries the byte offset or line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csnk
