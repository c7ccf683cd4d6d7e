#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace langmem {

enum class ErrorCode {
  EmptyInput,
  DimensionMismatch,
  RankError,
  NumericalError,
  DegenerateProjection,
  InsufficientOverlap,
  DegenerateVariance,
  DegenerateSmoothness,
  InsufficientData,
  InvalidSubgraph,
  InsufficientGroups,
  LanguageSetMismatch,
  WrongArchitecture,
  MissingLogprobs,
  RejectedMetric,
  InvalidRecord,
  ParseError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every module reports failures through this one type; `code()` lets callers
// (the CLI, sweep cells) distinguish degeneracies from malformed input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with `context` (a path, a record id) prepended to the detail.
  Error with_context(std::string_view context) const {
    return Error(code_, std::string(context) + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace langmem
