#pragma once

#include <stdexcept>
#include <string>

namespace r2e {

// Categories map onto CLI exit codes: invalid arguments -> 1, bad data -> 2.
enum class ErrorKind {
  InvalidArgument,
  BadMagic,
  BadVersion,
  Truncated,
  NonMonotonic,
  Unsorted,
  GeometryMismatch,
  Underflow,
  Degenerate,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace r2e
