#include "modelps/trainer/network.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::trainer {

using graph::LayerKind;

Network Network::from_graph(const graph::ModelGraph& g) {
  if (!graph::is_executable(g)) {
    throw Error(ErrorCode::kInvalidArgument,
                "graph is not executable by the native trainer (needs a chain of "
                "dense/relu/softmax/flatten/dropout/identity layers)");
  }
  auto shapes = graph::infer_shapes(g);
  auto order = graph::topological_order(g);
  Network net;
  net.input_dim_ = 1;
  for (auto d : g.input_shape) net.input_dim_ *= static_cast<std::size_t>(d);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const graph::LayerNode& node = *g.find(order[i]);
    const bool trailing_softmax = node.kind == LayerKind::kSoftmax && i + 1 == order.size();
    if (trailing_softmax) continue;
    Op op{node.kind, node.id, -1, 0.0};
    if (node.kind == LayerKind::kDense) {
      DenseLayer d;
      d.node_id = node.id;
      d.in = static_cast<std::size_t>(node.dim("in_features"));
      d.out = static_cast<std::size_t>(node.dim("out_features"));
      d.has_bias = node.attrs.at("bias") != 0.0;
      d.frozen = node.frozen;
      d.reinit = node.reinit;
      d.weight.assign(d.in * d.out, 0.0);
      if (d.has_bias) d.bias.assign(d.out, 0.0);
      op.dense_index = static_cast<int>(net.dense_.size());
      net.dense_.push_back(std::move(d));
    } else if (node.kind == LayerKind::kDropout) {
      op.p = node.attrs.at("p");
    }
    net.ops_.push_back(std::move(op));
  }
  std::size_t out = 1;
  for (auto d : shapes.at(order.back())) out *= static_cast<std::size_t>(d);
  net.output_dim_ = out;
  return net;
}

void Network::init_layer(std::size_t i, std::uint64_t seed) {
  DenseLayer& d = dense_.at(i);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d.in));
  std::mt19937_64 rng(mix_seed({seed, static_cast<std::uint64_t>(i), 0x1417ULL}));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& w : d.weight) w = u(rng);
  for (double& b : d.bias) b = u(rng);
}

void Network::init_all(std::uint64_t seed) {
  for (std::size_t i = 0; i < dense_.size(); ++i) init_layer(i, seed);
}

std::vector<std::string> Network::load(const repo::TensorBundle& tensors) {
  std::vector<std::string> loaded;
  for (auto& d : dense_) {
    if (d.reinit) continue;
    const repo::Tensor* w = tensors.find(d.node_id, "weight");
    if (!w || w->values.size() != d.weight.size() || w->shape.size() != 2 ||
        w->shape[0] != static_cast<std::int64_t>(d.out) ||
        w->shape[1] != static_cast<std::int64_t>(d.in)) {
      continue;
    }
    const repo::Tensor* b = tensors.find(d.node_id, "bias");
    if (d.has_bias && (!b || b->values.size() != d.out)) continue;
    d.weight = w->values;
    if (d.has_bias) d.bias = b->values;
    loaded.push_back(d.node_id);
  }
  return loaded;
}

repo::TensorBundle Network::to_tensors(repo::DType dtype) const {
  repo::TensorBundle b;
  b.dtype = dtype;
  for (const auto& d : dense_) {
    b.tensors.push_back({d.node_id, "weight",
                         {static_cast<std::int64_t>(d.out), static_cast<std::int64_t>(d.in)},
                         d.weight});
    if (d.has_bias) {
      b.tensors.push_back({d.node_id, "bias", {static_cast<std::int64_t>(d.out)}, d.bias});
    }
  }
  return b;
}

Network::Cache Network::forward(std::span<const double> x, std::size_t n, bool train,
                                std::uint64_t dropout_seed) const {
  if (x.size() != n * input_dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "input has " + std::to_string(x.size()) + " values, expected " +
                    std::to_string(n) + " x " + std::to_string(input_dim_));
  }
  Cache c;
  c.n = n;
  c.acts.reserve(ops_.size() + 1);
  c.acts.emplace_back(x.begin(), x.end());
  c.dropout_scale.resize(ops_.size());
  for (std::size_t oi = 0; oi < ops_.size(); ++oi) {
    const Op& op = ops_[oi];
    const std::vector<double>& in = c.acts.back();
    std::vector<double> out;
    switch (op.kind) {
      case LayerKind::kDense: {
        const DenseLayer& d = dense_[op.dense_index];
        out.assign(n * d.out, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
          const double* xi = in.data() + s * d.in;
          double* yo = out.data() + s * d.out;
          for (std::size_t o = 0; o < d.out; ++o) {
            const double* wrow = d.weight.data() + o * d.in;
            double acc = d.has_bias ? d.bias[o] : 0.0;
            for (std::size_t k = 0; k < d.in; ++k) acc += wrow[k] * xi[k];
            yo[o] = acc;
          }
        }
        break;
      }
      case LayerKind::kRelu:
        out = in;
        for (double& v : out) v = v > 0.0 ? v : 0.0;
        break;
      case LayerKind::kSoftmax: {
        out = in;
        const std::size_t width = in.size() / n;
        for (std::size_t s = 0; s < n; ++s) {
          double* row = out.data() + s * width;
          const double mx = *std::max_element(row, row + width);
          double sum = 0.0;
          for (std::size_t k = 0; k < width; ++k) sum += (row[k] = std::exp(row[k] - mx));
          for (std::size_t k = 0; k < width; ++k) row[k] /= sum;
        }
        break;
      }
      case LayerKind::kDropout:
        out = in;
        if (train && op.p > 0.0) {
          std::mt19937_64 rng(mix_seed({dropout_seed, static_cast<std::uint64_t>(oi)}));
          std::bernoulli_distribution keep(1.0 - op.p);
          const double scale = op.p < 1.0 ? 1.0 / (1.0 - op.p) : 0.0;
          auto& mask = c.dropout_scale[oi];
          mask.resize(out.size());
          for (std::size_t k = 0; k < out.size(); ++k) {
            mask[k] = keep(rng) ? scale : 0.0;
            out[k] *= mask[k];
          }
        }
        break;
      default:  // flatten, identity: data is already flat
        out = in;
        break;
    }
    c.acts.push_back(std::move(out));
  }
  return c;
}

Gradients Network::backward(const Cache& c, std::span<const double> dlogits,
                            std::optional<std::size_t> extra_index,
                            std::span<const double> extra_grad) const {
  Gradients g = zero_gradients();
  std::vector<double> grad(dlogits.begin(), dlogits.end());
  const std::size_t n = c.n;
  for (std::size_t oi = ops_.size(); oi-- > 0;) {
    if (extra_index && *extra_index == oi + 1) {
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += extra_grad[k];
    }
    const Op& op = ops_[oi];
    const std::vector<double>& in = c.acts[oi];
    const std::vector<double>& outv = c.acts[oi + 1];
    switch (op.kind) {
      case LayerKind::kDense: {
        const DenseLayer& d = dense_[op.dense_index];
        auto& gw = g.weight[op.dense_index];
        auto& gb = g.bias[op.dense_index];
        std::vector<double> gin(n * d.in, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
          const double* xi = in.data() + s * d.in;
          const double* go = grad.data() + s * d.out;
          double* gi = gin.data() + s * d.in;
          for (std::size_t o = 0; o < d.out; ++o) {
            const double gv = go[o];
            if (gv == 0.0) continue;
            double* gwrow = gw.data() + o * d.in;
            const double* wrow = d.weight.data() + o * d.in;
            for (std::size_t k = 0; k < d.in; ++k) {
              gwrow[k] += gv * xi[k];
              gi[k] += gv * wrow[k];
            }
            if (d.has_bias) gb[o] += gv;
          }
        }
        grad = std::move(gin);
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t k = 0; k < grad.size(); ++k) {
          if (in[k] <= 0.0) grad[k] = 0.0;
        }
        break;
      case LayerKind::kSoftmax: {
        const std::size_t width = outv.size() / n;
        for (std::size_t s = 0; s < n; ++s) {
          const double* y = outv.data() + s * width;
          double* gr = grad.data() + s * width;
          double dot = 0.0;
          for (std::size_t k = 0; k < width; ++k) dot += gr[k] * y[k];
          for (std::size_t k = 0; k < width; ++k) gr[k] = y[k] * (gr[k] - dot);
        }
        break;
      }
      case LayerKind::kDropout:
        if (!c.dropout_scale[oi].empty()) {
          for (std::size_t k = 0; k < grad.size(); ++k) grad[k] *= c.dropout_scale[oi][k];
        }
        break;
      default:
        break;
    }
  }
  return g;
}

std::vector<int> Network::predict(std::span<const double> x, std::size_t n) const {
  Cache c = forward(x, n);
  const auto& z = logits(c);
  std::vector<int> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double* row = z.data() + s * output_dim_;
    out[s] = static_cast<int>(std::max_element(row, row + output_dim_) - row);
  }
  return out;
}

double Network::accuracy(const features::Batch& batch) const {
  if (batch.n == 0) return 0.0;
  auto pred = predict(batch.features, batch.n);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < batch.n; ++i) hit += pred[i] == batch.labels[i];
  return static_cast<double>(hit) / static_cast<double>(batch.n);
}

std::size_t Network::hidden_index() const {
  for (std::size_t oi = ops_.size(); oi-- > 0;) {
    if (ops_[oi].kind == LayerKind::kDense) return oi;
  }
  return 0;
}

std::int64_t Network::param_count() const {
  std::int64_t total = 0;
  for (const auto& d : dense_) total += static_cast<std::int64_t>(d.weight.size() + d.bias.size());
  return total;
}

Gradients Network::zero_gradients() const {
  Gradients g;
  for (const auto& d : dense_) {
    g.weight.emplace_back(d.weight.size(), 0.0);
    g.bias.emplace_back(d.bias.size(), 0.0);
  }
  return g;
}

OptimizerState Network::zero_state() const {
  OptimizerState s;
  for (const auto& d : dense_) {
    s.weight.emplace_back(d.weight.size(), 0.0);
    s.bias.emplace_back(d.bias.size(), 0.0);
  }
  return s;
}

void sgd_update(Network& net, OptimizerState& state, const Gradients& grads, double lr,
                double momentum) {
  auto& layers = net.dense();
  if (state.weight.empty() && state.bias.empty()) state = net.zero_state();
  if (state.weight.size() != layers.size() || state.bias.size() != layers.size()) {
    throw Error(ErrorCode::kInternal, "optimizer state does not match the network",
                {{"layers", layers.size()}, {"state_layers", state.weight.size()}});
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    DenseLayer& d = layers[i];
    if (d.frozen) continue;
    auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
      for (std::size_t k = 0; k < w.size(); ++k) {
        v[k] = momentum * v[k] + g[k];
        w[k] -= lr * v[k];
      }
    };
    step(d.weight, state.weight[i], grads.weight[i]);
    step(d.bias, state.bias[i], grads.bias[i]);
  }
}

}  // namespace modelps::trainer
