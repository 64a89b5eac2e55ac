#pragma once

#include <stdexcept>
#include <string>

namespace rcshrink {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar argument is outside its admissible domain (tau <= 0, q outside (0,1), ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Shapes or level layouts are inconsistent (non-dyadic lengths, missing levels, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or parsed.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure did not reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved_error)
      : Error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

}  // namespace rcshrink
