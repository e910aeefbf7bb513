#pragma once

#include <stdexcept>
#include <string>

namespace freqlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid problem setup (dimension, tolerances, unknown keys, ...).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested half-sphere mode is not symmetric across the equator.
class SelectionError : public Error {
 public:
  using Error::Error;
};

/// Forcing too singular at the origin for the regular branch.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or other numerical failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Not enough resolved samples to estimate a vanishing order.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// H fell below the floor; the frequency is undefined there.
class DegenerateMassError : public Error {
 public:
  using Error::Error;
};

/// Fitted frequency limit is not close to an integer.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

/// Rescaled coefficient sequence does not settle on the smallest decade.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace freqlab
