#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "modelps/graph/graph.h"

namespace modelps::graph {

// Layer-level edits. Ensemble-level choices (base model, dataset,
// augmentation, hyperparameters) live in the training config instead.
struct SetAttr {
  std::string node_id;
  std::string key;
  double value = 0.0;
};

// Inserts `node` directly after `after_id`, taking over its out-edges.
struct InsertNode {
  LayerNode node;
  std::string after_id;
};

struct RemoveNode {
  std::string node_id;
  bool reconnect = true;
};

// Resizes the output of the final parameterized layer and flags it for
// fresh initialization.
struct ReplaceHead {
  std::int64_t new_out_features = 0;
};

// Freezes the first `count` parameterized layers and unfreezes the rest.
struct SetFrozenPrefix {
  std::int64_t count = 0;
};

using EditAction =
    std::variant<SetAttr, InsertNode, RemoveNode, ReplaceHead, SetFrozenPrefix>;

// Applies one edit atomically. The input is never modified; any failure of
// the re-validated result is reported as InvalidResult with the cause in
// details["cause"].
ModelGraph apply_edit(const ModelGraph& graph, const EditAction& action);

nlohmann::json edit_to_json(const EditAction& action);
EditAction edit_from_json(const nlohmann::json& j);

}  // namespace modelps::graph
