#pragma once

#include <stdexcept>
#include <string>

namespace sfm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a kernel or an iterative solver.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NearPiRotation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSylvester : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotSPD : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The logarithm left the principal branch (near-pi rotation or singular
/// Sylvester system inside the iteration).
class NonPrincipal : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LogNotConverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Argument violates a documented precondition (shape, manifold membership).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class BaseMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class MassMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class TypeViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class FormulaMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfm
