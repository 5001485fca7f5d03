#pragma once

// Random history records and requests over small value sets so that ties in
// every sort key show up often.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "modelps/genie/query.h"

namespace modelps::testing {

inline const std::vector<std::string>& gen_datasets() {
  static const std::vector<std::string> d = {"ds-a", "ds-b", "ds-c"};
  return d;
}

inline trainer::TlMethod gen_method(std::mt19937_64& rng) {
  static const trainer::TlMethod all[] = {
      trainer::TlMethod::kFineTune, trainer::TlMethod::kKnowledgeDistill,
      trainer::TlMethod::kTradaboost, trainer::TlMethod::kMmdAdapt};
  return all[std::uniform_int_distribution<int>(0, 3)(rng)];
}

inline genie::HistoryRecord random_record(std::mt19937_64& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  trainer::TrainConfig c;
  c.tl_method = gen_method(rng);
  c.base_model_id = "m-" + std::to_string(pick(4));
  c.dataset_id = gen_datasets()[pick(3)];
  c.lr = std::pow(10.0, -1 - pick(3));
  c.epochs = 1 + pick(5);
  c.frozen_layers = pick(3);
  c.seed = static_cast<std::uint64_t>(pick(4));
  trainer::ValidationReport r;
  r.accuracy = 0.5 + 0.05 * pick(11);
  r.inference_latency_ms = 0.1 * (1 + pick(8));
  r.train_time_s = 0.5 * pick(6);
  r.params = 100 * (1 + pick(5));
  const repo::Task task =
      pick(2) ? repo::Task::kTabularClassification : repo::Task::kTextClassification;
  return genie::make_record(c, r, task, pick(20), "seed");
}

inline genie::GenieRequest random_request(std::mt19937_64& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  static const genie::Metric metrics[] = {genie::Metric::kAccuracy, genie::Metric::kLatencyMs,
                                          genie::Metric::kTrainTimeS, genie::Metric::kParams};
  genie::GenieRequest q;
  q.task = pick(2) ? repo::Task::kTabularClassification : repo::Task::kTextClassification;
  q.dataset_id = gen_datasets()[pick(3)];
  q.top_k = 1 + pick(10);
  for (int i = pick(4); i > 0; --i) {
    genie::Constraint c;
    c.metric = metrics[pick(4)];
    c.op = pick(2) ? genie::CmpOp::kGe : genie::CmpOp::kLe;
    switch (c.metric) {
      case genie::Metric::kAccuracy: c.value = 0.5 + 0.05 * pick(11); break;
      case genie::Metric::kLatencyMs: c.value = 0.1 * (1 + pick(8)); break;
      case genie::Metric::kTrainTimeS: c.value = 0.5 * pick(6); break;
      case genie::Metric::kParams: c.value = 100.0 * (1 + pick(5)); break;
    }
    q.constraints.push_back(c);
  }
  for (int i = 1 + pick(3); i > 0; --i) {
    q.targets.push_back({metrics[pick(4)],
                         pick(2) ? genie::Direction::kMaximize : genie::Direction::kMinimize});
  }
  return q;
}

}  // namespace modelps::testing
