#pragma once

#include <stdexcept>
#include <string>

namespace mwi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a precondition or a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation cannot deliver the requested accuracy on the given grid or
/// step budget.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mwi
