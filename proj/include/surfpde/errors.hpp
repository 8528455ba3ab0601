#pragma once

#include <stdexcept>
#include <string>

namespace surfpde {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: malformed meshes, bad parameters, inconsistent configuration.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Numerical failure: solver breakdown, non-convergence, singular systems.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Filesystem or stream failure while reading or writing.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace surfpde
