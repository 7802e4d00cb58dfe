#pragma once

#include <stdexcept>
#include <string>

namespace weakseg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric parameter (kernel size, connectivity, ...) is out of range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was breached by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class LabelErrorKind { Syntax, Schema, OutOfBounds, DuplicateKind };

/// Rejection of a weak-label document. `region_index` is -1 for
/// document-level problems.
class LabelError : public Error {
 public:
  LabelError(LabelErrorKind kind, int region_index, const std::string& message)
      : Error(message), kind_(kind), region_index_(region_index) {}

  LabelErrorKind kind() const noexcept { return kind_; }
  int region_index() const noexcept { return region_index_; }

 private:
  LabelErrorKind kind_;
  int region_index_;
};

/// The outline of a growth constraint crosses itself.
class ConstraintGeometryError : public Error {
 public:
  ConstraintGeometryError(int region_index, const std::string& message)
      : Error(message), region_index_(region_index) {}

  int region_index() const noexcept { return region_index_; }

 private:
  int region_index_;
};

}  // namespace weakseg
