#pragma once

#include <stdexcept>
#include <string>

namespace i2lt {

// Malformed or inconsistent input data (files, corpora, dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-convergence or non-finite values inside the numerical core.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments use std::invalid_argument.

}  // namespace i2lt
