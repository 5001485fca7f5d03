#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modelps/features/augmentation.h"
#include "modelps/graph/graph.h"
#include "modelps/repository/tensor_bundle.h"

namespace modelps::trainer {

struct DenseLayer {
  std::string node_id;
  std::size_t in = 0;
  std::size_t out = 0;
  bool has_bias = true;
  bool frozen = false;
  bool reinit = false;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out (empty when has_bias is false)

  bool operator==(const DenseLayer&) const = default;
};

struct Gradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;
};

// SGD momentum buffers, one per dense layer.
struct OptimizerState {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  bool operator==(const OptimizerState&) const = default;
};

// Executable form of a chain graph made of dense/relu/softmax/flatten/
// dropout/identity layers. A trailing softmax is folded into the loss, so
// forward() yields logits.
class Network {
 public:
  struct Op {
    graph::LayerKind kind = graph::LayerKind::kIdentity;
    std::string node_id;
    int dense_index = -1;
    double p = 0.0;  // dropout

    bool operator==(const Op&) const = default;
  };

  // acts[0] is the input; acts[i + 1] is the output of ops()[i].
  struct Cache {
    std::size_t n = 0;
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> dropout_scale;  // per op, empty if unused
  };

  // Throws InvalidArgument when the graph is not executable.
  static Network from_graph(const graph::ModelGraph& graph);

  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_layer(std::size_t dense_index, std::uint64_t seed);
  void init_all(std::uint64_t seed);
  // Copies weights for layers whose node id and shape match, skipping
  // reinit-flagged layers. Returns the node ids that were loaded.
  std::vector<std::string> load(const repo::TensorBundle& tensors);
  repo::TensorBundle to_tensors(repo::DType dtype = repo::DType::kFloat32) const;

  Cache forward(std::span<const double> x, std::size_t n, bool train = false,
                std::uint64_t dropout_seed = 0) const;
  static const std::vector<double>& logits(const Cache& cache) { return cache.acts.back(); }

  // `extra_index`/`extra_grad`: an additional gradient injected at
  // acts[extra_index] (used by feature-level penalties).
  Gradients backward(const Cache& cache, std::span<const double> dlogits,
                     std::optional<std::size_t> extra_index = std::nullopt,
                     std::span<const double> extra_grad = {}) const;

  std::vector<int> predict(std::span<const double> x, std::size_t n) const;
  double accuracy(const features::Batch& batch) const;

  // Index into Cache::acts of the representation fed to the final dense
  // layer.
  std::size_t hidden_index() const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::int64_t param_count() const;

  std::vector<DenseLayer>& dense() { return dense_; }
  const std::vector<DenseLayer>& dense() const { return dense_; }
  const std::vector<Op>& ops() const { return ops_; }

  Gradients zero_gradients() const;
  OptimizerState zero_state() const;

  bool operator==(const Network&) const = default;

 private:
  std::vector<Op> ops_;
  std::vector<DenseLayer> dense_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
};

// v <- momentum * v + g; w <- w - lr * v. Frozen layers are untouched.
void sgd_update(Network& net, OptimizerState& state, const Gradients& grads, double lr,
                double momentum);

}  // namespace modelps::trainer
