#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "modelps/graph/graph.h"

namespace modelps::graph {

inline constexpr std::string_view kDraftSchemaVersion = "modelps.draft/1";

// Unfinalized edit state shared between collaborators.
struct Draft {
  ModelGraph graph;
  std::string base_model_id;
  // Partial training config (ensemble-level edits); keys are a subset of
  // the training-config fields.
  nlohmann::ordered_json pending_config = nlohmann::ordered_json::object();
  std::int64_t revision = 0;
  std::string author;

  bool operator==(const Draft&) const = default;
};

nlohmann::ordered_json draft_to_json(const Draft& draft);
Draft draft_from_json(const nlohmann::ordered_json& j);

// Canonical form: UTF-8, keys in schema order, no insignificant whitespace.
std::string serialize_draft(const Draft& draft);
// Strict parse; throws SchemaViolation(path, reason).
Draft parse_draft(std::string_view bytes);

}  // namespace modelps::graph
