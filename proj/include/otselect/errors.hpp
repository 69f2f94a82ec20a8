#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace otselect {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A row that cannot be normalized (all zeros or non-finite norm).
class ZeroRowError : public Error {
 public:
  explicit ZeroRowError(std::size_t row)
      : Error("row " + std::to_string(row) + " has zero norm and cannot be normalized"),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Selection budget cannot be met (e.g. after attribution pruning).
class InfeasibleBudget : public Error {
 public:
  using Error::Error;
};

class UnknownMethod : public Error {
 public:
  using Error::Error;
};

}  // namespace otselect
