#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace modelps::graph {

enum class LayerKind {
  kDense,
  kRelu,
  kSoftmax,
  kFlatten,
  kDropout,
  kConv2d,
  kMaxPool2d,
  kIdentity,
};

std::string_view to_string(LayerKind kind);
// Throws SchemaViolation for unknown names.
LayerKind layer_kind_from_string(std::string_view name);

// Attribute keys a node of `kind` must carry, in canonical (schema) order.
std::span<const std::string_view> required_attrs(LayerKind kind);
bool is_parameterized(LayerKind kind);
// Kinds the native trainer can execute; the rest are shape-checked and
// cost-modeled only.
bool is_executable(LayerKind kind);

using Shape = std::vector<std::int64_t>;
using ShapeMap = std::map<std::string, Shape>;

struct LayerNode {
  std::string id;
  std::string name;
  LayerKind kind = LayerKind::kIdentity;
  std::map<std::string, double> attrs;
  bool frozen = false;
  // Set by ReplaceHead; the trainer gives this layer fresh weights.
  bool reinit = false;

  // Integer view of a dimension attribute; throws InvalidGraph if absent.
  std::int64_t dim(std::string_view key) const;

  bool operator==(const LayerNode&) const = default;
};

struct Edge {
  std::string from;
  std::string to;

  bool operator==(const Edge&) const = default;
};

struct ModelGraph {
  std::vector<LayerNode> nodes;
  std::vector<Edge> edges;
  Shape input_shape;

  const LayerNode* find(std::string_view id) const;
  LayerNode* find(std::string_view id);

  bool operator==(const ModelGraph&) const = default;
};

// Checks attribute keys and value domains of a single node.
void validate_node(const LayerNode& node);

// Structural checks (unique ids, edge endpoints, single source/sink, acyclic)
// and a deterministic topological order: Kahn's algorithm breaking ties by
// position in `nodes`.
std::vector<std::string> topological_order(const ModelGraph& graph);

ShapeMap infer_shapes(const ModelGraph& graph);

// Full validity: node attrs, structure, and shape inference.
void validate(const ModelGraph& graph);

std::int64_t count_params(const ModelGraph& graph);
std::int64_t node_params(const LayerNode& node);

// floor((in + 2*padding - kernel) / stride) + 1; requires in + 2p >= kernel.
std::int64_t window_output_dim(std::int64_t in, std::int64_t kernel,
                               std::int64_t stride, std::int64_t padding);

// Ids of dense/conv2d nodes in topological order.
std::vector<std::string> parameterized_layers(const ModelGraph& graph);

// True when every node has at most one predecessor and one successor.
bool is_chain(const ModelGraph& graph);
// A chain made only of executable kinds.
bool is_executable(const ModelGraph& graph);

nlohmann::ordered_json to_json(const ModelGraph& graph);
nlohmann::ordered_json shapes_to_json(const ShapeMap& shapes);
// Strict: unknown fields are rejected; errors carry a JSON-pointer path
// rooted at `path`.
ModelGraph graph_from_json(const nlohmann::ordered_json& j,
                           const std::string& path = "");
ModelGraph graph_from_json(const nlohmann::json& j, const std::string& path = "");

}  // namespace modelps::graph
