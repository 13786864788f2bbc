#pragma once

#include <stdexcept>
#include <string>

namespace robshash {

// Precondition violated by the caller: bad parameters, too few rows, etc.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The sample has no spread (zero MAD), so no scale-based standardization exists.
class DegenerateSample : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A floating-point evaluation left the representable range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative estimator reached its iteration cap without meeting tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data could not be read or contained nothing usable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace robshash
