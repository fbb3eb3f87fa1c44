#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lethargy {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kHypothesisViolation,
  kInsufficientDimension,
  kNonMergeable,
  kRankTooLarge,
  kUnsupported,
  kMalformedProblem,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; thrown for contract
/// violations. Numerical outcomes (non-convergence, failed bounds) are
/// reported in result structs instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lethargy
