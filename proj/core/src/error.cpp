#include "modelps/error.h"

namespace modelps {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kMultipleSources: return "MultipleSources";
    case ErrorCode::kMultipleSinks: return "MultipleSinks";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kInvalidResult: return "InvalidResult";
    case ErrorCode::kRemoveWouldOrphan: return "RemoveWouldOrphan";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kMissingMetadata: return "MissingMetadata";
    case ErrorCode::kDanglingParent: return "DanglingParent";
    case ErrorCode::kStaleRevision: return "StaleRevision";
    case ErrorCode::kUnknownDraft: return "UnknownDraft";
    case ErrorCode::kUnknownModel: return "UnknownModel";
    case ErrorCode::kLineageCycle: return "LineageCycle";
    case ErrorCode::kStoreCorrupt: return "StoreCorrupt";
    case ErrorCode::kShapeInconsistent: return "ShapeInconsistent";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kUnknownDataset: return "UnknownDataset";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kIllegalTransition: return "IllegalTransition";
    case ErrorCode::kUnknownJob: return "UnknownJob";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kIncompatibleDatasets: return "IncompatibleDatasets";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kNoCandidateModels: return "NoCandidateModels";
    case ErrorCode::kEvaluatorFailure: return "EvaluatorFailure";
    case ErrorCode::kPortInUse: return "PortInUse";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Internal";
}

bool is_user_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kStoreCorrupt:
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kEvaluatorFailure:
    case ErrorCode::kPortInUse:
    case ErrorCode::kInternal:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, std::string message, nlohmann::json details)
    : std::runtime_error(std::move(message)),
      code_(code),
      details_(std::move(details)) {}

nlohmann::json Error::to_json() const {
  return {{"error", std::string(modelps::to_string(code_))},
          {"message", what()},
          {"details", details_}};
}

}  // namespace modelps
