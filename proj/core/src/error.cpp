#include "apc/error.hpp"

namespace apc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroRow: return "ZeroRow";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kInvalidSpectrum: return "InvalidSpectrum";
    case ErrorCode::kMissingAgent: return "MissingAgent";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEigensolveFailed: return "EigensolveFailed";
    case ErrorCode::kSingularIminusG: return "SingularIminusG";
    case ErrorCode::kKappaUnreachable: return "KappaUnreachable";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRankDeficient:
    case ErrorCode::kInvalidSpectrum:
    case ErrorCode::kNonFinite:
    case ErrorCode::kEigensolveFailed:
    case ErrorCode::kSingularIminusG:
    case ErrorCode::kKappaUnreachable:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      index_(index) {}

}  // namespace apc
