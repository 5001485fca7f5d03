#pragma once

// Reference implementations written as plain loops, kept independent of the
// library code they check.

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "modelps/genie/query.h"
#include "modelps/repository/repository.h"
#include "modelps/trainer/network.h"

namespace modelps::oracle {

// ---- repository -----------------------------------------------------------

inline std::vector<repo::ModelRecord> retrieve(std::vector<repo::ModelRecord> all,
                                               const repo::Query& q) {
  std::vector<repo::ModelRecord> hits;
  for (auto& r : all) {
    bool ok = true;
    if (q.task) ok = ok && r.task == *q.task;
    if (q.name_contains) ok = ok && r.name.find(*q.name_contains) != std::string::npos;
    if (q.min_accuracy) ok = ok && !(r.metadata.accuracy < *q.min_accuracy);
    if (q.max_latency_ms) ok = ok && !(r.metadata.latency_ms > *q.max_latency_ms);
    if (q.parent_model_id) {
      ok = ok && r.metadata.parent_model_id && *r.metadata.parent_model_id == *q.parent_model_id;
    }
    if (ok) hits.push_back(r);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    return a.model_id < b.model_id;
  });
  auto key = [&](const repo::ModelRecord& r) -> double {
    switch (q.sort) {
      case repo::SortKey::kAccuracy: return r.metadata.accuracy;
      case repo::SortKey::kLatency: return r.metadata.latency_ms;
      case repo::SortKey::kParams: return double(r.metadata.params);
      case repo::SortKey::kCreatedAt: return double(r.created_at);
      default: return 0.0;
    }
  };
  if (q.sort == repo::SortKey::kName) {
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) { return a.name < b.name; });
  } else {
    std::stable_sort(hits.begin(), hits.end(),
                     [&](const auto& a, const auto& b) { return key(a) < key(b); });
  }
  if (q.descending) std::reverse(hits.begin(), hits.end());
  if (q.limit && hits.size() > *q.limit) hits.resize(*q.limit);
  return hits;
}

// ---- history search -------------------------------------------------------

inline double metric(const trainer::ValidationReport& r, genie::Metric m) {
  switch (m) {
    case genie::Metric::kAccuracy: return r.accuracy;
    case genie::Metric::kLatencyMs: return r.inference_latency_ms;
    case genie::Metric::kTrainTimeS: return r.train_time_s;
    case genie::Metric::kParams: return double(r.params);
  }
  return 0.0;
}

inline std::vector<genie::HistoryRecord> search_history(const genie::GenieRequest& q,
                                                        trainer::TlMethod method,
                                                        const std::vector<genie::HistoryRecord>& all) {
  std::vector<genie::HistoryRecord> hits;
  for (const auto& r : all) {
    if (r.method != method || r.task != q.task || r.config.dataset_id != q.dataset_id) continue;
    bool ok = true;
    for (const auto& c : q.constraints) {
      const double v = metric(r.report, c.metric);
      ok = ok && (c.op == genie::CmpOp::kGe ? v >= c.value : v <= c.value);
    }
    if (ok) hits.push_back(r);
  }
  // Sort key: each target oriented so that smaller is better, then newest
  // first, then hash.
  auto key = [&](const genie::HistoryRecord& r) {
    std::vector<double> k;
    for (const auto& t : q.targets) {
      const double v = metric(r.report, t.metric);
      k.push_back(t.direction == genie::Direction::kMaximize ? -v : v);
    }
    return std::make_tuple(k, -r.timestamp, r.config_hash);
  };
  std::stable_sort(hits.begin(), hits.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  if (hits.size() > std::size_t(q.top_k)) hits.resize(q.top_k);
  return hits;
}

// ---- network loss ---------------------------------------------------------

// Mean softmax cross-entropy of a dense/relu/identity chain, evaluated
// directly from the layer parameters.
inline double mlp_loss(const trainer::Network& net, const std::vector<double>& x, std::size_t n,
                       const std::vector<int>& labels) {
  double total = 0.0;
  const std::size_t in = net.input_dim();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> a(x.begin() + s * in, x.begin() + (s + 1) * in);
    for (const auto& op : net.ops()) {
      if (op.kind == graph::LayerKind::kDense) {
        const auto& L = net.dense()[op.dense_index];
        std::vector<double> z(L.out, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
          double acc = L.has_bias ? L.bias[o] : 0.0;
          for (std::size_t i = 0; i < L.in; ++i) acc += L.weight[o * L.in + i] * a[i];
          z[o] = acc;
        }
        a = z;
      } else if (op.kind == graph::LayerKind::kRelu) {
        for (auto& v : a) v = v > 0 ? v : 0.0;
      }
    }
    double mx = a[0];
    for (double v : a) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : a) sum += std::exp(v - mx);
    total += -(a[labels[s]] - mx - std::log(sum));
  }
  return total / double(n);
}

// ---- losses ---------------------------------------------------------------

inline std::vector<double> softmax(const std::vector<double>& z, double t) {
  std::vector<double> p(z.size());
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp((z[i] - mx) / t);
  for (auto& v : p) v /= sum;
  return p;
}

// Single-sample distillation objective.
inline double kd_scalar(const std::vector<double>& s, const std::vector<double>& t, int label,
                        double temperature, double alpha) {
  const double ce = -std::log(softmax(s, 1.0)[label]);
  const auto ps = softmax(s, temperature), pt = softmax(t, temperature);
  double kl = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) kl += pt[i] * std::log(pt[i] / ps[i]);
  return alpha * ce + (1 - alpha) * temperature * temperature * kl;
}

// |mean(a) - mean(b)|^2.
inline double mmd_linear(const std::vector<std::vector<double>>& a,
                         const std::vector<std::vector<double>>& b) {
  double total = 0.0;
  for (std::size_t d = 0; d < a[0].size(); ++d) {
    double ma = 0.0, mb = 0.0;
    for (const auto& r : a) ma += r[d];
    for (const auto& r : b) mb += r[d];
    ma /= double(a.size());
    mb /= double(b.size());
    total += (ma - mb) * (ma - mb);
  }
  return total;
}

inline double mmd_rbf(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b, double gamma) {
  auto k = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-gamma * d2);
  };
  auto mean_k = [&](const auto& u, const auto& v) {
    double s = 0.0;
    for (const auto& x : u)
      for (const auto& y : v) s += k(x, y);
    return s / double(u.size() * v.size());
  };
  return mean_k(a, a) + mean_k(b, b) - 2.0 * mean_k(a, b);
}

// ---- shapes ---------------------------------------------------------------

inline std::int64_t conv_out(std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t p) {
  // Counts valid window positions one by one.
  std::int64_t count = 0;
  for (std::int64_t start = -p; start + k <= in + p; start += s) ++count;
  return count;
}

}  // namespace modelps::oracle
