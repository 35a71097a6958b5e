#pragma once

#include <stdexcept>
#include <string>

namespace logad {

enum class ErrorKind {
  DimensionMismatch,
  EmptyCorpus,
  TooShort,
  ZeroVector,
  SplitOutOfRange,
  TooLarge,
  InvalidArgument,
  Io,
  Config,
  Format,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace logad
