#pragma once

#include <stdexcept>
#include <string>

namespace panelflow {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid user input: bad manifest, out-of-range parameter, grid mismatch.
// The command-line tool maps this to exit code 1.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// Numerical breakdown: solver non-convergence, NaN in a state field.
// The command-line tool maps this to exit code 2.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace panelflow
