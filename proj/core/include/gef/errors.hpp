#pragma once

#include <stdexcept>
#include <string>

namespace gef {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Class index, token id or subscore outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Caller broke an API precondition (non-scalar loss, empty sequence, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by an operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input data or configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gef
