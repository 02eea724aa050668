#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jjosc {

enum class ErrorKind {
  InvalidArgument,
  Unlocked,
  Degenerate,
  NoOscillation,
  NonConvergence,
  Diverging,
  StepSizeUnderflow,
  NoPeak,
  TooShort,
  EmptyBand,
  PoorFit,
  AliasRisk,
  Underdetermined,
  EmptyInput,
  NonMonotoneFrequencies,
  ConfigParse,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for every recoverable failure in the library. The
/// kind is what callers branch on; the message carries the numeric context.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace jjosc
