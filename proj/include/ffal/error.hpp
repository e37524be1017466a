#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ffal {

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  LabelOutOfRange,
  ShapeMismatch,
  EmptyDataset,
  MissingLabels,
  ExhaustedCandidates,
  PoolExhausted,
  InfeasibleQuota,
  EmptyCenters,
  InvalidArgument,
  NotNormalized,
  TooFewClasses,
  EmptyTrainingSet,
  Diverged,
  NoHiddenRepresentation,
  InfeasibleSeparation,
  BadMagic,
  VersionMismatch,
  Truncated,
  Io,
  Parse,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` distinguishes failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ffal
