#include "modelps/graph/edit.h"

#include <algorithm>
#include <set>
#include <type_traits>

#include "modelps/error.h"

namespace modelps::graph {
namespace {

[[noreturn]] void unknown_node(const std::string& id) {
  throw Error(ErrorCode::kUnknownNode, "unknown node '" + id + "'",
              {{"node_id", id}});
}

ModelGraph mutate(const ModelGraph& graph, const SetAttr& a) {
  ModelGraph g = graph;
  LayerNode* n = g.find(a.node_id);
  if (!n) unknown_node(a.node_id);
  n->attrs[a.key] = a.value;
  return g;
}

ModelGraph mutate(const ModelGraph& graph, const InsertNode& a) {
  ModelGraph g = graph;
  auto pos = std::find_if(g.nodes.begin(), g.nodes.end(),
                          [&](const LayerNode& n) { return n.id == a.after_id; });
  if (pos == g.nodes.end()) unknown_node(a.after_id);
  if (g.find(a.node.id)) {
    throw Error(ErrorCode::kInvalidGraph, "duplicate node id '" + a.node.id + "'",
                {{"node_id", a.node.id}});
  }
  for (auto& e : g.edges) {
    if (e.from == a.after_id) e.from = a.node.id;
  }
  g.edges.push_back({a.after_id, a.node.id});
  g.nodes.insert(pos + 1, a.node);
  return g;
}

ModelGraph mutate(const ModelGraph& graph, const RemoveNode& a) {
  ModelGraph g = graph;
  if (!g.find(a.node_id)) unknown_node(a.node_id);
  std::vector<std::string> preds, succs;
  std::vector<Edge> kept;
  for (const auto& e : g.edges) {
    if (e.to == a.node_id) {
      preds.push_back(e.from);
    } else if (e.from == a.node_id) {
      succs.push_back(e.to);
    } else {
      kept.push_back(e);
    }
  }
  if (!a.reconnect && !preds.empty() && !succs.empty()) {
    throw Error(ErrorCode::kRemoveWouldOrphan,
                "removing '" + a.node_id + "' without reconnect would orphan its successors",
                {{"node_id", a.node_id}});
  }
  if (a.reconnect) {
    for (const auto& p : preds) {
      for (const auto& s : succs) {
        Edge e{p, s};
        if (std::find(kept.begin(), kept.end(), e) == kept.end()) kept.push_back(e);
      }
    }
  }
  g.edges = std::move(kept);
  std::erase_if(g.nodes, [&](const LayerNode& n) { return n.id == a.node_id; });
  return g;
}

ModelGraph mutate(const ModelGraph& graph, const ReplaceHead& a) {
  if (a.new_out_features < 1) {
    throw Error(ErrorCode::kInvalidArgument, "new_out_features must be >= 1");
  }
  auto layers = parameterized_layers(graph);
  if (layers.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "graph has no parameterized layer");
  }
  ModelGraph g = graph;
  LayerNode* head = g.find(layers.back());
  const char* key = head->kind == LayerKind::kDense ? "out_features" : "out_channels";
  head->attrs[key] = static_cast<double>(a.new_out_features);
  head->reinit = true;
  return g;
}

ModelGraph mutate(const ModelGraph& graph, const SetFrozenPrefix& a) {
  auto layers = parameterized_layers(graph);
  if (a.count < 0 || a.count > static_cast<std::int64_t>(layers.size())) {
    throw Error(ErrorCode::kInvalidArgument,
                "frozen prefix " + std::to_string(a.count) + " exceeds " +
                    std::to_string(layers.size()) + " parameterized layers",
                {{"count", a.count}, {"available", layers.size()}});
  }
  ModelGraph g = graph;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    g.find(layers[i])->frozen = static_cast<std::int64_t>(i) < a.count;
  }
  return g;
}

}  // namespace

ModelGraph apply_edit(const ModelGraph& graph, const EditAction& action) {
  ModelGraph result = std::visit([&](const auto& a) { return mutate(graph, a); }, action);
  try {
    validate(result);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidResult,
                std::string("edit rejected: ") + e.what(), {{"cause", e.to_json()}});
  }
  return result;
}

nlohmann::json edit_to_json(const EditAction& action) {
  return std::visit(
      [](const auto& a) -> nlohmann::json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SetAttr>) {
          return {{"op", "set_attr"}, {"node_id", a.node_id}, {"key", a.key}, {"value", a.value}};
        } else if constexpr (std::is_same_v<T, InsertNode>) {
          ModelGraph tmp;
          tmp.nodes.push_back(a.node);
          return {{"op", "insert_node"},
                  {"node", nlohmann::json::parse(to_json(tmp)["nodes"][0].dump())},
                  {"after_id", a.after_id}};
        } else if constexpr (std::is_same_v<T, RemoveNode>) {
          return {{"op", "remove_node"}, {"node_id", a.node_id}, {"reconnect", a.reconnect}};
        } else if constexpr (std::is_same_v<T, ReplaceHead>) {
          return {{"op", "replace_head"}, {"new_out_features", a.new_out_features}};
        } else {
          return {{"op", "set_frozen_prefix"}, {"count", a.count}};
        }
      },
      action);
}

EditAction edit_from_json(const nlohmann::json& j) {
  try {
    const std::string op = j.at("op").get<std::string>();
    if (op == "set_attr") {
      return SetAttr{j.at("node_id").get<std::string>(), j.at("key").get<std::string>(),
                     j.at("value").get<double>()};
    }
    if (op == "insert_node") {
      nlohmann::json wrapper = {{"input_shape", {1}},
                                {"nodes", {j.at("node")}},
                                {"edges", nlohmann::json::array()}};
      ModelGraph tmp = graph_from_json(wrapper, "");
      return InsertNode{tmp.nodes.front(), j.at("after_id").get<std::string>()};
    }
    if (op == "remove_node") {
      return RemoveNode{j.at("node_id").get<std::string>(), j.value("reconnect", true)};
    }
    if (op == "replace_head") {
      return ReplaceHead{j.at("new_out_features").get<std::int64_t>()};
    }
    if (op == "set_frozen_prefix") {
      return SetFrozenPrefix{j.at("count").get<std::int64_t>()};
    }
    throw Error(ErrorCode::kSchemaViolation, "unknown edit op '" + op + "'",
                {{"path", "/op"}, {"reason", "unknown edit op"}});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("malformed edit: ") + e.what(),
                {{"path", "/"}, {"reason", e.what()}});
  }
}

}  // namespace modelps::graph
