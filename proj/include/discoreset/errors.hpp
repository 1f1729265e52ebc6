#pragma once

#include <stdexcept>
#include <string>

namespace discoreset {

/// Bad arguments: dimension mismatch, empty input, out-of-range parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A symmetric matrix that should be PSD has a significantly negative eigenvalue.
class NotPsdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Las Vegas loop ran out of attempts for some cell.
class ColoringFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace detail
}  // namespace discoreset
