#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amgcn {

enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  MissingFile,
  RaggedFeatures,
  LabelGap,
  IndexOutOfRange,
  ParseError,
  InsufficientNodes,
  NumericalFailure,
  ContractViolation,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code so the
// CLI can map it to a distinct exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace amgcn
