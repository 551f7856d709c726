#pragma once

#include <stdexcept>
#include <string>

namespace hueplan {

/// Malformed input or a violated domain invariant in caller-supplied data.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hueplan
