#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uapr {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteValue,
  NonPositiveVariance,
  TimestampOrderViolation,
  InvalidLayout,
  InvalidArgument,
  ZeroVector,
  MemberCountMismatch,
  EmptyVisibleSet,
  MethodDataMismatch,
  MissingTimestamps,
  MissingPoses,
  NoMatchableQueries,
  DegenerateClass,
  InvalidSpec,
  BadMagic,
  VersionUnsupported,
  TruncatedPayload,
  ManifestMismatch,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace uapr
