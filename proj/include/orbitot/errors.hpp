#pragma once

#include <stdexcept>
#include <string>

namespace orbitot {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Argument outside the mathematical domain of the function (e.g. t outside (0,1)).
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Eigensolver or SVD failed, or the spectrum violates the SPD floor.
class SpectrumError : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

}  // namespace orbitot
