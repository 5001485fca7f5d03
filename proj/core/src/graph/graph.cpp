#include "modelps/graph/graph.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "modelps/error.h"

namespace modelps::graph {
namespace {

using nlohmann::ordered_json;

constexpr std::array<std::string_view, 3> kDenseAttrs = {"in_features",
                                                         "out_features", "bias"};
constexpr std::array<std::string_view, 5> kConvAttrs = {
    "in_channels", "out_channels", "kernel", "stride", "padding"};
constexpr std::array<std::string_view, 1> kDropoutAttrs = {"p"};
constexpr std::array<std::string_view, 2> kPoolAttrs = {"kernel", "stride"};

struct KindName {
  LayerKind kind;
  std::string_view name;
};
constexpr std::array<KindName, 8> kKindNames = {{
    {LayerKind::kDense, "dense"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kSoftmax, "softmax"},
    {LayerKind::kFlatten, "flatten"},
    {LayerKind::kDropout, "dropout"},
    {LayerKind::kConv2d, "conv2d"},
    {LayerKind::kMaxPool2d, "maxpool2d"},
    {LayerKind::kIdentity, "identity"},
}};

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

[[noreturn]] void shape_mismatch(const std::string& node_id,
                                 const std::string& expected, const Shape& got,
                                 nlohmann::json extra = nlohmann::json::object()) {
  extra["node_id"] = node_id;
  extra["expected"] = expected;
  extra["got"] = got;
  throw Error(ErrorCode::kShapeMismatch,
              "shape mismatch at node '" + node_id + "': expected " + expected +
                  ", got " + shape_str(got),
              std::move(extra));
}

[[noreturn]] void schema_violation(const std::string& path,
                                   const std::string& reason) {
  throw Error(ErrorCode::kSchemaViolation, path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

bool is_nonneg_dim_key(std::string_view key) { return key == "padding"; }

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "identity";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw Error(ErrorCode::kSchemaViolation,
              "unknown layer kind '" + std::string(name) + "'",
              {{"kind", std::string(name)}});
}

std::span<const std::string_view> required_attrs(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return kDenseAttrs;
    case LayerKind::kConv2d: return kConvAttrs;
    case LayerKind::kDropout: return kDropoutAttrs;
    case LayerKind::kMaxPool2d: return kPoolAttrs;
    default: return {};
  }
}

bool is_parameterized(LayerKind kind) {
  return kind == LayerKind::kDense || kind == LayerKind::kConv2d;
}

bool is_executable(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kRelu:
    case LayerKind::kSoftmax:
    case LayerKind::kFlatten:
    case LayerKind::kDropout:
    case LayerKind::kIdentity:
      return true;
    default:
      return false;
  }
}

std::int64_t LayerNode::dim(std::string_view key) const {
  auto it = attrs.find(std::string(key));
  if (it == attrs.end()) {
    throw Error(ErrorCode::kInvalidGraph,
                "node '" + id + "' lacks attribute '" + std::string(key) + "'",
                {{"node_id", id}, {"attr", std::string(key)}});
  }
  return static_cast<std::int64_t>(it->second);
}

const LayerNode* ModelGraph::find(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

LayerNode* ModelGraph::find(std::string_view id) {
  for (auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

void validate_node(const LayerNode& node) {
  auto fail = [&](const std::string& reason) {
    throw Error(ErrorCode::kInvalidGraph,
                "invalid node '" + node.id + "': " + reason,
                {{"node_id", node.id}, {"reason", reason}});
  };
  if (node.id.empty()) fail("empty id");
  auto req = required_attrs(node.kind);
  if (node.attrs.size() != req.size()) {
    fail("expected " + std::to_string(req.size()) + " attributes for " +
         std::string(to_string(node.kind)));
  }
  for (std::string_view key : req) {
    auto it = node.attrs.find(std::string(key));
    if (it == node.attrs.end()) fail("missing attribute '" + std::string(key) + "'");
    double v = it->second;
    if (!std::isfinite(v)) fail("attribute '" + std::string(key) + "' is not finite");
    if (key == "p") {
      if (v < 0.0 || v > 1.0) fail("p must lie in [0,1]");
    } else if (key == "bias") {
      if (v != 0.0 && v != 1.0) fail("bias must be 0 or 1");
    } else {
      if (v != std::floor(v)) fail("attribute '" + std::string(key) + "' must be an integer");
      double lo = is_nonneg_dim_key(key) ? 0.0 : 1.0;
      if (v < lo) fail("attribute '" + std::string(key) + "' out of range");
    }
  }
}

std::vector<std::string> topological_order(const ModelGraph& graph) {
  if (graph.nodes.empty()) {
    throw Error(ErrorCode::kInvalidGraph, "graph has no nodes");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!index.emplace(graph.nodes[i].id, i).second) {
      throw Error(ErrorCode::kInvalidGraph,
                  "duplicate node id '" + graph.nodes[i].id + "'",
                  {{"node_id", graph.nodes[i].id}});
    }
  }
  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indeg(n, 0), outdeg(n, 0);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : graph.edges) {
    auto f = index.find(e.from);
    auto t = index.find(e.to);
    if (f == index.end() || t == index.end()) {
      const std::string& missing = f == index.end() ? e.from : e.to;
      throw Error(ErrorCode::kInvalidGraph,
                  "edge references unknown node '" + missing + "'",
                  {{"node_id", missing}});
    }
    if (!seen.emplace(f->second, t->second).second) {
      throw Error(ErrorCode::kInvalidGraph,
                  "duplicate edge " + e.from + "->" + e.to);
    }
    succ[f->second].push_back(t->second);
    ++indeg[t->second];
    ++outdeg[f->second];
  }
  std::vector<std::size_t> sources;
  std::size_t sinks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) sources.push_back(i);
    if (outdeg[i] == 0) ++sinks;
  }
  if (sources.empty()) throw Error(ErrorCode::kCycleDetected, "graph has a cycle");
  if (sources.size() > 1) {
    throw Error(ErrorCode::kMultipleSources,
                "graph has " + std::to_string(sources.size()) + " sources",
                {{"count", sources.size()}});
  }

  // Kahn's algorithm; the ready set is ordered by node position.
  std::set<std::size_t> ready(sources.begin(), sources.end());
  std::vector<std::string> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(graph.nodes[i].id);
    for (std::size_t s : succ[i]) {
      if (--indeg[s] == 0) ready.insert(s);
    }
  }
  if (order.size() != n) throw Error(ErrorCode::kCycleDetected, "graph has a cycle");
  if (sinks != 1) {
    throw Error(ErrorCode::kMultipleSinks,
                "graph has " + std::to_string(sinks) + " sinks",
                {{"count", sinks}});
  }
  return order;
}

std::int64_t window_output_dim(std::int64_t in, std::int64_t kernel,
                               std::int64_t stride, std::int64_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

ShapeMap infer_shapes(const ModelGraph& graph) {
  auto order = topological_order(graph);
  if (graph.input_shape.empty()) {
    throw Error(ErrorCode::kInvalidGraph, "input_shape is empty");
  }
  for (auto d : graph.input_shape) {
    if (d < 1) throw Error(ErrorCode::kInvalidGraph, "input_shape dims must be positive");
  }
  std::unordered_map<std::string, std::vector<std::string>> preds;
  for (const auto& e : graph.edges) preds[e.to].push_back(e.from);

  ShapeMap shapes;
  for (const auto& id : order) {
    const LayerNode& node = *graph.find(id);
    validate_node(node);
    Shape in;
    auto pit = preds.find(id);
    if (pit == preds.end()) {
      in = graph.input_shape;
    } else {
      in = shapes.at(pit->second.front());
      for (const auto& p : pit->second) {
        if (shapes.at(p) != in) shape_mismatch(id, shape_str(in), shapes.at(p));
      }
    }

    Shape out;
    switch (node.kind) {
      case LayerKind::kDense: {
        std::int64_t want = node.dim("in_features");
        if (in.size() != 1 || in[0] != want) {
          shape_mismatch(id, "[" + std::to_string(want) + "]", in,
                         {{"expected_in", want},
                          {"got_in", in.size() == 1 ? nlohmann::json(in[0]) : nlohmann::json(in)}});
        }
        out = {node.dim("out_features")};
        break;
      }
      case LayerKind::kConv2d:
      case LayerKind::kMaxPool2d: {
        const bool conv = node.kind == LayerKind::kConv2d;
        const std::int64_t k = node.dim("kernel");
        const std::int64_t s = node.dim("stride");
        const std::int64_t p = conv ? node.dim("padding") : 0;
        if (in.size() != 3) shape_mismatch(id, "[C,H,W]", in);
        if (conv && in[0] != node.dim("in_channels")) {
          shape_mismatch(id, "[" + std::to_string(node.dim("in_channels")) + ",H,W]",
                         in);
        }
        if (in[1] + 2 * p < k || in[2] + 2 * p < k) {
          shape_mismatch(id, "spatial dims >= kernel " + std::to_string(k), in);
        }
        out = {conv ? node.dim("out_channels") : in[0],
               window_output_dim(in[1], k, s, p), window_output_dim(in[2], k, s, p)};
        break;
      }
      case LayerKind::kFlatten:
        out = {std::accumulate(in.begin(), in.end(), std::int64_t{1},
                               std::multiplies<>())};
        break;
      default:
        out = in;
        break;
    }
    shapes.emplace(id, std::move(out));
  }
  return shapes;
}

void validate(const ModelGraph& graph) { (void)infer_shapes(graph); }

std::int64_t node_params(const LayerNode& node) {
  switch (node.kind) {
    case LayerKind::kDense: {
      std::int64_t in = node.dim("in_features"), out = node.dim("out_features");
      return in * out + (node.attrs.at("bias") != 0.0 ? out : 0);
    }
    case LayerKind::kConv2d: {
      std::int64_t in = node.dim("in_channels"), out = node.dim("out_channels");
      std::int64_t k = node.dim("kernel");
      return in * out * k * k + out;
    }
    default:
      return 0;
  }
}

std::int64_t count_params(const ModelGraph& graph) {
  validate(graph);
  std::int64_t total = 0;
  for (const auto& n : graph.nodes) total += node_params(n);
  return total;
}

std::vector<std::string> parameterized_layers(const ModelGraph& graph) {
  std::vector<std::string> out;
  for (const auto& id : topological_order(graph)) {
    if (is_parameterized(graph.find(id)->kind)) out.push_back(id);
  }
  return out;
}

bool is_chain(const ModelGraph& graph) {
  std::unordered_map<std::string, int> in, out;
  for (const auto& e : graph.edges) {
    if (++out[e.from] > 1 || ++in[e.to] > 1) return false;
  }
  return true;
}

bool is_executable(const ModelGraph& graph) {
  if (!is_chain(graph)) return false;
  return std::all_of(graph.nodes.begin(), graph.nodes.end(),
                     [](const LayerNode& n) { return is_executable(n.kind); });
}

ordered_json to_json(const ModelGraph& graph) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : graph.nodes) {
    ordered_json attrs = ordered_json::object();
    for (std::string_view key : required_attrs(n.kind)) {
      auto it = n.attrs.find(std::string(key));
      if (it == n.attrs.end()) continue;
      if (key == "p") {
        attrs[std::string(key)] = it->second;
      } else {
        attrs[std::string(key)] = static_cast<std::int64_t>(it->second);
      }
    }
    // Attributes outside the schema are kept so that invalid graphs still
    // serialize (validation reports them).
    for (const auto& [key, value] : n.attrs) {
      if (!attrs.contains(key)) attrs[key] = value;
    }
    ordered_json node = {{"id", n.id},
                         {"name", n.name},
                         {"kind", std::string(to_string(n.kind))},
                         {"attrs", std::move(attrs)},
                         {"frozen", n.frozen}};
    if (n.reinit) node["reinit"] = true;
    nodes.push_back(std::move(node));
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : graph.edges) edges.push_back({e.from, e.to});
  return {{"input_shape", graph.input_shape},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

ordered_json shapes_to_json(const ShapeMap& shapes) {
  ordered_json out = ordered_json::object();
  for (const auto& [id, s] : shapes) out[id] = s;
  return out;
}

namespace {

void require_keys(const ordered_json& j, const std::string& path,
                  std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) schema_violation(path.empty() ? "/" : path, "expected object");
  for (std::string_view k : required) {
    if (!j.contains(std::string(k))) {
      schema_violation(path + "/" + std::string(k), "missing required field");
    }
  }
  for (const auto& [key, _] : j.items()) {
    bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                 std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) schema_violation(path + "/" + key, "unknown field");
  }
}

}  // namespace

ModelGraph graph_from_json(const ordered_json& j, const std::string& path) {
  require_keys(j, path, {"input_shape", "nodes", "edges"});
  ModelGraph g;
  const auto& shape = j.at("input_shape");
  if (!shape.is_array()) schema_violation(path + "/input_shape", "expected array");
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!shape[i].is_number_integer()) {
      schema_violation(path + "/input_shape/" + std::to_string(i), "expected integer");
    }
    g.input_shape.push_back(shape[i].get<std::int64_t>());
  }
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array()) schema_violation(path + "/nodes", "expected array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string np = path + "/nodes/" + std::to_string(i);
    const auto& nj = nodes[i];
    require_keys(nj, np, {"id", "name", "kind", "attrs", "frozen"}, {"reinit"});
    LayerNode n;
    if (!nj.at("id").is_string()) schema_violation(np + "/id", "expected string");
    if (!nj.at("name").is_string()) schema_violation(np + "/name", "expected string");
    if (!nj.at("kind").is_string()) schema_violation(np + "/kind", "expected string");
    if (!nj.at("frozen").is_boolean()) schema_violation(np + "/frozen", "expected boolean");
    n.id = nj.at("id").get<std::string>();
    n.name = nj.at("name").get<std::string>();
    try {
      n.kind = layer_kind_from_string(nj.at("kind").get<std::string>());
    } catch (const Error&) {
      schema_violation(np + "/kind", "unknown layer kind");
    }
    n.frozen = nj.at("frozen").get<bool>();
    if (nj.contains("reinit")) {
      if (!nj.at("reinit").is_boolean()) schema_violation(np + "/reinit", "expected boolean");
      n.reinit = nj.at("reinit").get<bool>();
    }
    const auto& attrs = nj.at("attrs");
    if (!attrs.is_object()) schema_violation(np + "/attrs", "expected object");
    for (const auto& [key, value] : attrs.items()) {
      if (!value.is_number()) schema_violation(np + "/attrs/" + key, "expected number");
      n.attrs[key] = value.get<double>();
    }
    g.nodes.push_back(std::move(n));
  }
  const auto& edges = j.at("edges");
  if (!edges.is_array()) schema_violation(path + "/edges", "expected array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      schema_violation(path + "/edges/" + std::to_string(i),
                       "expected [from, to] string pair");
    }
    g.edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
  }
  return g;
}

ModelGraph graph_from_json(const nlohmann::json& j, const std::string& path) {
  return graph_from_json(ordered_json::parse(j.dump()), path);
}

}  // namespace modelps::graph
