#pragma once

#include <stdexcept>
#include <string>

namespace backbone {

/// Base for every failure raised by the library. Invalid arguments use
/// std::invalid_argument directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure (ODE step collapse, quadrature, bisection) failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Root bracketing for λ* did not terminate: the mechanism does not tend to +∞.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// The offspring pmf could not reach the requested tail mass by n_max.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double achieved_tail)
      : Error(what), achieved_tail_(achieved_tail) {}
  double achieved_tail() const noexcept { return achieved_tail_; }

 private:
  double achieved_tail_;
};

class SamplerDegenerateError : public Error {
 public:
  using Error::Error;
};

/// The decay-fit window [1e-6, 1e-3] of the defect is empty on the grid.
class DomainTooShortError : public Error {
 public:
  using Error::Error;
};

/// Requested s below the accuracy floor of the evolved derivatives.
class PrecisionLimitError : public Error {
 public:
  using Error::Error;
};

class NoSurvivorsError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or mechanism file (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace backbone
