#ifndef SPIKESEV_COMMON_HPP
#define SPIKESEV_COMMON_HPP

#include <stdexcept>
#include <string>

namespace spikesev {

/// Malformed or missing user input (files, flags, config). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary container problems: bad magic, version, truncation, dimensions.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// Tensor or architecture shape violations.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spikesev

#endif  // SPIKESEV_COMMON_HPP
