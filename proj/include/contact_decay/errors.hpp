#pragma once

#include <stdexcept>
#include <string>

namespace contact_decay {

// A computation could not reach its requested accuracy (solver did not
// converge, a zero-survivor point in a fit window, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checked mathematical property failed.
class PropertyViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace contact_decay
