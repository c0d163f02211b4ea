#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace apc {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kZeroRow,
  kRankDeficient,
  kInvalidSpectrum,
  kMissingAgent,
  kMissingGroundTruth,
  kNonFinite,
  kEigensolveFailed,
  kSingularIminusG,
  kKappaUnreachable,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Numerical failures (divergence, singular solves, unreachable targets) as
// opposed to malformed input. The CLI maps these to distinct exit codes.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }

  // 1-based agent index for ZeroRow / MissingAgent, round index for NonFinite.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace apc
