#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "modelps/features/feature_store.h"
#include "modelps/graph/draft.h"
#include "modelps/graph/graph.h"
#include "modelps/repository/repository.h"
#include "modelps/repository/stores.h"
#include "modelps/util.h"

namespace modelps::testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / random_id("modelps-test")) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void append(graph::ModelGraph& g, graph::LayerNode node) {
  if (!g.nodes.empty()) g.edges.push_back({g.nodes.back().id, node.id});
  g.nodes.push_back(std::move(node));
}

inline graph::LayerNode dense(const std::string& id, std::int64_t in, std::int64_t out,
                              bool bias = true) {
  return {id, id, graph::LayerKind::kDense,
          {{"in_features", double(in)}, {"out_features", double(out)}, {"bias", bias ? 1.0 : 0.0}}};
}

inline graph::LayerNode relu(const std::string& id) {
  return {id, id, graph::LayerKind::kRelu, {}};
}

// in -> hidden... -> classes, relu between dense layers, optional softmax.
inline graph::ModelGraph mlp(std::int64_t in, const std::vector<std::int64_t>& hidden,
                             std::int64_t classes, bool softmax = true) {
  graph::ModelGraph g;
  g.input_shape = {in};
  std::int64_t prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    append(g, dense("fc" + std::to_string(i + 1), prev, hidden[i]));
    append(g, relu("relu" + std::to_string(i + 1)));
    prev = hidden[i];
  }
  append(g, dense("head", prev, classes));
  if (softmax) append(g, {"prob", "prob", graph::LayerKind::kSoftmax, {}});
  return g;
}

// Random valid chain graph: either a dense stack or a conv stack feeding a
// dense head.
inline graph::ModelGraph random_graph(std::mt19937_64& rng) {
  using graph::LayerKind;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  graph::ModelGraph g;
  if (pick(0, 1) == 0) {
    std::int64_t prev = pick(1, 64);
    g.input_shape = {prev};
    const int layers = pick(1, 5);
    for (int i = 0; i < layers; ++i) {
      const std::string id = "n" + std::to_string(i);
      const std::int64_t out = pick(1, 64);
      append(g, dense(id, prev, out, pick(0, 1) == 1));
      prev = out;
      switch (pick(0, 3)) {
        case 0: append(g, relu(id + "r")); break;
        case 1:
          append(g, {id + "d", "drop", LayerKind::kDropout, {{"p", pick(0, 9) / 10.0}}});
          break;
        case 2: append(g, {id + "i", "id", LayerKind::kIdentity, {}}); break;
        default: break;
      }
    }
  } else {
    std::int64_t c = pick(1, 4), h = pick(8, 24), w = pick(8, 24);
    g.input_shape = {c, h, w};
    const int convs = pick(1, 2);
    for (int i = 0; i < convs; ++i) {
      const std::int64_t k = pick(1, 3), s = pick(1, 2), p = pick(0, 1), oc = pick(1, 8);
      append(g, {"c" + std::to_string(i), "conv", LayerKind::kConv2d,
                 {{"in_channels", double(c)}, {"out_channels", double(oc)}, {"kernel", double(k)},
                  {"stride", double(s)}, {"padding", double(p)}}});
      h = (h + 2 * p - k) / s + 1;
      w = (w + 2 * p - k) / s + 1;
      c = oc;
    }
    append(g, {"flat", "flatten", LayerKind::kFlatten, {}});
    append(g, dense("out", c * h * w, pick(2, 10)));
  }
  if (pick(0, 2) == 0) append(g, {"sm", "softmax", LayerKind::kSoftmax, {}});
  for (auto& n : g.nodes) {
    if (graph::is_parameterized(n.kind)) n.frozen = pick(0, 1) == 1;
  }
  return g;
}

inline graph::Draft random_draft(std::mt19937_64& rng) {
  graph::Draft d;
  d.graph = random_graph(rng);
  d.revision = std::uniform_int_distribution<int>(0, 1000)(rng);
  static const std::vector<std::string> kAuthors = {"ana", "ben", "zoë", "李", "o'neil \"q\""};
  d.author = kAuthors[rng() % kAuthors.size()];
  d.base_model_id = (rng() % 2) ? "m-" + std::to_string(rng() % 100000) : "";
  if (rng() % 2) d.pending_config["lr"] = std::uniform_real_distribution<double>(1e-4, 0.1)(rng);
  if (rng() % 2) d.pending_config["epochs"] = int(rng() % 20 + 1);
  if (rng() % 2) d.pending_config["aug_preset"] = "noise-0.05";
  return d;
}

// Repository over in-memory stores with a deterministic clock.
inline std::unique_ptr<repo::Repository> memory_repository() {
  auto tick = std::make_shared<std::int64_t>(1'700'000'000'000);
  return std::make_unique<repo::Repository>(std::make_shared<repo::MemoryDocumentStore>(),
                                            std::make_shared<repo::MemoryBlobStore>(),
                                            [tick] { return ++*tick; });
}

}  // namespace modelps::testing
