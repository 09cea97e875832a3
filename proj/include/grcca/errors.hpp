#pragma once

#include <stdexcept>
#include <string>

namespace grcca {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input, inconsistent shapes or unsupported options. The CLI maps
/// these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The problem is well formed but numerically infeasible (singular
/// covariance, unidentifiable partition, ...). The CLI maps these to exit
/// code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, long row, long column)
      : InputError(what), row_(row), column_(column) {}

  /// 1-based data row (header excluded), or 0 when not applicable.
  long row() const noexcept { return row_; }
  /// 1-based column, or 0 when the whole row is at fault.
  long column() const noexcept { return column_; }

 private:
  long row_;
  long column_;
};

#define GRCCA_DEFINE_ERROR(Name, Base) \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  };

GRCCA_DEFINE_ERROR(EmptyInput, InputError)
GRCCA_DEFINE_ERROR(ShapeError, InputError)
GRCCA_DEFINE_ERROR(StateError, InputError)
GRCCA_DEFINE_ERROR(DomainError, InputError)
GRCCA_DEFINE_ERROR(UnsupportedPenalty, InputError)
GRCCA_DEFINE_ERROR(InvalidCovariance, InputError)

GRCCA_DEFINE_ERROR(SingularDesign, NumericalError)
GRCCA_DEFINE_ERROR(IdentifiabilityError, NumericalError)
GRCCA_DEFINE_ERROR(DegenerateDirection, NumericalError)
GRCCA_DEFINE_ERROR(DegenerateVariate, NumericalError)
GRCCA_DEFINE_ERROR(NoFeasiblePoint, NumericalError)
GRCCA_DEFINE_ERROR(NumericalConsistency, NumericalError)

#undef GRCCA_DEFINE_ERROR

/// Regularized self-covariance is not positive definite.
class SingularCovariance : public NumericalError {
 public:
  SingularCovariance(char side, double min_eigenvalue)
      : NumericalError(std::string("regularized ") + side +
                       "-side covariance is not positive definite (min eigenvalue " +
                       std::to_string(min_eigenvalue) + ")"),
        side_(side),
        min_eigenvalue_(min_eigenvalue) {}

  char side() const noexcept { return side_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  char side_;
  double min_eigenvalue_;
};

}  // namespace grcca
