#include "arbc/error.hpp"

namespace arbc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptImage: return "CorruptImage";
    case ErrorKind::InvalidSide: return "InvalidSide";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LayerOutOfRange: return "LayerOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidArchitecture: return "InvalidArchitecture";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyIndex: return "EmptyIndex";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::MalformedCode: return "MalformedCode";
    case ErrorKind::EmptyCodeSet: return "EmptyCodeSet";
    case ErrorKind::MissingBranchEntry: return "MissingBranchEntry";
    case ErrorKind::MissingCode: return "MissingCode";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

}  // namespace arbc
