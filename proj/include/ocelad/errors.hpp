#pragma once

#include <stdexcept>
#include <string>

namespace ocelad {

/// Bad caller input: dimension mismatch, out-of-range parameter, malformed file.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear-algebra routine received non-finite data or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal bookkeeping went inconsistent. Indicates a bug, not bad input.
class LogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ocelad
