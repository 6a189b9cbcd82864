#include "r2e/error.hpp"

namespace r2e {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::BadMagic: return "bad magic";
    case ErrorKind::BadVersion: return "unsupported version";
    case ErrorKind::Truncated: return "truncated payload";
    case ErrorKind::NonMonotonic: return "non-monotonic timestamps";
    case ErrorKind::Unsorted: return "unsorted events";
    case ErrorKind::GeometryMismatch: return "geometry mismatch";
    case ErrorKind::Underflow: return "timestamp underflow";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Io: return "i/o error";
  }
  return "unknown";
}

}  // namespace r2e
