#include "logad/error.hpp"

namespace logad {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::SplitOutOfRange: return "SplitOutOfRange";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace logad
