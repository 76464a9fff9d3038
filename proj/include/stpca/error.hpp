#pragma once

#include <stdexcept>
#include <string>

namespace stpca {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable input values.
class InvalidDataError : public Error {
 public:
  using Error::Error;
};

/// Fewer observations than an operation needs (m < 2, empty CSV, ...).
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a constrained argument (e.g. unit Frobenius norm) failed.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Sequence that must be ordered is not.
class OrderingError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// CSV parse failure; row and column are 1-based positions in the file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace stpca
