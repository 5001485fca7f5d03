#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace modelps {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidGraph,
  kShapeMismatch,
  kCycleDetected,
  kMultipleSources,
  kMultipleSinks,
  kUnknownNode,
  kInvalidResult,
  kRemoveWouldOrphan,
  kSchemaViolation,
  kMissingMetadata,
  kDanglingParent,
  kStaleRevision,
  kUnknownDraft,
  kUnknownModel,
  kLineageCycle,
  kStoreCorrupt,
  kShapeInconsistent,
  kLabelOutOfRange,
  kUnknownDataset,
  kEmptySplit,
  kIllegalTransition,
  kUnknownJob,
  kNonFiniteLoss,
  kIncompatibleDatasets,
  kDimMismatch,
  kInvalidConfig,
  kNoCandidateModels,
  kEvaluatorFailure,
  kPortInUse,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// User errors map to CLI exit code 1 and HTTP 4xx; the rest are internal.
bool is_user_error(ErrorCode code);

// Every failure surfaced by the library is a modelps::Error carrying a
// stable code plus structured details that the CLI and HTTP layers echo.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        nlohmann::json details = nlohmann::json::object());

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

  // {"error": <code>, "message": ..., "details": {...}}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace modelps
