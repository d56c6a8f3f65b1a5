#ifndef DDCS_ERROR_HPP
#define DDCS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ddcs {

/// Base class for every failure raised by the library. Messages are short,
/// lower-case and meant to be appended to "error: <stage>: ".
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddcs

#endif  // DDCS_ERROR_HPP
