#pragma once

#include <stdexcept>
#include <string>

namespace illusion_forge {

enum class ErrorCode {
  Io,
  MalformedHeader,
  ChannelCount,
  TruncatedPayload,
  Dimension,
  NonFinite,
  BitDepth,
  MissingKey,
  NotOrthonormal,
  Validation,
  MissingRegionId,
  OverlappingPairs,
  TooFewPoints,
  DegenerateSupport,
  DeltaDegenerate,
  RankDeficient,
  NonPositiveDepth,
  BehindCamera,
  UndefinedScale,
  AllHoles,
  EmptyValidSet,
  NonPositiveRatio,
  UnknownFrame,
};

const char* to_string(ErrorCode code);

/// Single exception type for every library failure; `code()` distinguishes
/// the failure class so callers (CLI exit codes, HTTP status) can dispatch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace illusion_forge
