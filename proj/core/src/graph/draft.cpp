#include "modelps/graph/draft.h"

#include <algorithm>

#include "modelps/error.h"
#include "modelps/trainer/train_config.h"

namespace modelps::graph {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void violation(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kSchemaViolation, path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

}  // namespace

ordered_json draft_to_json(const Draft& draft) {
  return {{"schema_version", std::string(kDraftSchemaVersion)},
          {"base_model_id", draft.base_model_id},
          {"revision", draft.revision},
          {"author", draft.author},
          {"graph", to_json(draft.graph)},
          {"pending_config", draft.pending_config}};
}

Draft draft_from_json(const ordered_json& j) {
  if (!j.is_object()) violation("/", "expected object");
  static constexpr std::string_view kFields[] = {"schema_version", "base_model_id", "revision",
                                                 "author", "graph", "pending_config"};
  for (std::string_view f : kFields) {
    if (!j.contains(std::string(f))) violation("/" + std::string(f), "missing required field");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kFields), std::end(kFields), key) == std::end(kFields)) {
      violation("/" + key, "unknown field");
    }
  }
  if (!j["schema_version"].is_string() ||
      j["schema_version"].get<std::string>() != kDraftSchemaVersion) {
    violation("/schema_version",
              "unsupported schema version, expected " + std::string(kDraftSchemaVersion));
  }
  if (!j["base_model_id"].is_string()) violation("/base_model_id", "expected string");
  if (!j["revision"].is_number_integer()) violation("/revision", "expected integer");
  if (!j["author"].is_string()) violation("/author", "expected string");
  if (!j["pending_config"].is_object()) violation("/pending_config", "expected object");
  const auto fields = trainer::train_config_fields();
  for (const auto& [key, _] : j["pending_config"].items()) {
    if (std::find(fields.begin(), fields.end(), key) == fields.end()) {
      violation("/pending_config/" + key, "unknown training-config field");
    }
  }

  Draft d;
  d.base_model_id = j["base_model_id"].get<std::string>();
  d.revision = j["revision"].get<std::int64_t>();
  if (d.revision < 0) violation("/revision", "must be non-negative");
  d.author = j["author"].get<std::string>();
  d.graph = graph_from_json(j["graph"], "/graph");
  d.pending_config = j["pending_config"];
  return d;
}

std::string serialize_draft(const Draft& draft) { return draft_to_json(draft).dump(); }

Draft parse_draft(std::string_view bytes) {
  ordered_json j;
  try {
    j = ordered_json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    violation("/", std::string("malformed JSON: ") + e.what());
  }
  return draft_from_json(j);
}

}  // namespace modelps::graph
