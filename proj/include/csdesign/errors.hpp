#pragma once

#include <stdexcept>
#include <string>

namespace csd {

/// Malformed inputs: bad dimensions, weights, configs, empty grids.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Numerical failures: non-convergent iterations, violated invariants.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A matrix that must be (strictly) positive definite is not.
class SingularMatrixError : public NumericalError {
 public:
  explicit SingularMatrixError(const std::string& what)
      : NumericalError(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace csd
