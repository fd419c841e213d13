#include "amgcn/error.hpp"

namespace amgcn {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::MissingFile: return "missing-file";
    case ErrorCode::RaggedFeatures: return "ragged-features";
    case ErrorCode::LabelGap: return "label-gap";
    case ErrorCode::IndexOutOfRange: return "index-out-of-range";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::InsufficientNodes: return "insufficient-nodes";
    case ErrorCode::NumericalFailure: return "numerical-failure";
    case ErrorCode::ContractViolation: return "contract-violation";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace amgcn
