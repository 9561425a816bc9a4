#pragma once

#include <stdexcept>
#include <string>

namespace crpslearn {

// Bad input: shapes, ranges, schemas. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical failure inside a computation (singular system, non-finite state,
// solver non-convergence). The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crpslearn
