#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arbc {

enum class ErrorKind {
  FileNotFound,
  UnsupportedFormat,
  CorruptImage,
  InvalidSide,
  InvalidArgument,
  DimensionMismatch,
  LayerOutOfRange,
  LengthMismatch,
  InvalidArchitecture,
  EmptyDataset,
  EmptyIndex,
  InvalidConfig,
  MalformedCode,
  EmptyCodeSet,
  MissingBranchEntry,
  MissingCode,
  IoError,
  FormatError,
  VersionMismatch,
  ConfigMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures surface as this exception; `kind()` lets callers
// (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace arbc
