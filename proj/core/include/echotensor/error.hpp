#pragma once

#include <stdexcept>
#include <string>

namespace echotensor {

// Malformed or inconsistent input data (files, ids, shapes coming from data).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite objective, failed factorization or similar numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace echotensor
