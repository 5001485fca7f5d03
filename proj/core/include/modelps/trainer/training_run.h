#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/features/feature_store.h"
#include "modelps/graph/graph.h"
#include "modelps/repository/repository.h"
#include "modelps/trainer/network.h"
#include "modelps/trainer/tradaboost.h"
#include "modelps/trainer/train_config.h"

namespace modelps::trainer {

struct TrainingContext {
  const repo::Repository* repository = nullptr;
  const features::FeatureStore* features = nullptr;
};

// Student for knowledge_distill: hidden dense widths halved (min 8), input
// and output sizes kept.
graph::ModelGraph distill_student(const graph::ModelGraph& teacher);

struct PreparedModel {
  graph::ModelGraph graph;  // frozen prefix applied
  Network net;
  std::vector<std::string> transferred;  // layers initialized from the base
};

// Resolves the graph to train and its initial weights. Throws InvalidConfig
// for unknown models/datasets and shape or class-count mismatches.
PreparedModel prepare_model(const TrainingContext& ctx, const TrainConfig& config);

// Mini-batches consumed by one epoch: rows shuffled by (seed, epoch), batch b
// augmented with seed (seed, epoch, b).
std::vector<features::Batch> epoch_batches(const features::Batch& train,
                                           const TrainConfig& config, int num_classes,
                                           int epoch);
std::uint64_t dropout_seed(const TrainConfig& config, int epoch, std::size_t batch);

// One SGD-momentum step on softmax cross-entropy. Returns the pre-step loss;
// throws NonFiniteLoss.
double train_step(Network& net, OptimizerState& state, const features::Batch& batch,
                  const TrainConfig& config, std::uint64_t dropout_seed = 0);

class RunControl {
 public:
  virtual ~RunControl() = default;
  virtual bool pause_requested() const { return false; }
  virtual bool terminate_requested() const { return false; }
  virtual void on_epoch(int /*epoch*/, double /*loss*/) {}
};

enum class RunStatus { kCompleted, kPaused, kTerminated, kBudgetExhausted };
std::string_view to_string(RunStatus status);

struct Checkpoint {
  int epoch = 0;
  double train_time_s = 0.0;
  repo::TensorBundle tensors;  // float64
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const Checkpoint&) const = default;
};

// Blob plus sidecar {job_id, epoch, rng_state, ...} under `dir`.
void save_checkpoint(const std::filesystem::path& dir, const std::string& job_id,
                     const Checkpoint& checkpoint);
std::optional<Checkpoint> load_checkpoint(const std::filesystem::path& dir,
                                          const std::string& job_id);

// A resumable training run. Every random draw is derived from (seed, epoch,
// batch), so pausing and resuming reproduces an uninterrupted run exactly.
class TrainingRun {
 public:
  TrainingRun(TrainingContext ctx, TrainConfig config);

  // Trains from the current epoch. Pause/terminate flags are polled at batch
  // boundaries; pause is honoured at the epoch boundary. With a budget, an
  // epoch is only started when its estimated duration fits, and an epoch that
  // overruns is rolled back.
  RunStatus run(RunControl& control, std::optional<double> budget_s = std::nullopt);
  RunStatus run() {
    RunControl c;
    return run(c);
  }

  int epochs_completed() const { return epoch_; }
  int total_epochs() const;
  double train_time_s() const { return train_time_s_; }
  const std::vector<double>& epoch_losses() const { return losses_; }

  double evaluate(features::Split split) const;
  double measure_latency_ms(int runs = 100, int warmup = 10) const;
  ValidationReport report() const;

  const TrainConfig& config() const { return config_; }
  const graph::ModelGraph& graph() const { return graph_; }
  const features::DatasetRecord& dataset() const { return dataset_; }
  // The model to publish; for tradaboost the strongest ensemble member.
  const Network& network() const;
  const Tradaboost* boosting() const { return boost_.get(); }
  std::vector<std::string> transferred_layers() const { return transferred_; }

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& checkpoint);

 private:
  struct Snapshot {
    Network net;
    OptimizerState opt;
  };

  bool run_epoch(RunControl& control, const std::function<bool()>& over_budget, double* loss);
  double estimate_epoch_s() const;

  TrainingContext ctx_;
  TrainConfig config_;
  features::DatasetRecord dataset_;
  graph::ModelGraph graph_;
  Network net_;
  OptimizerState opt_;
  std::vector<std::string> transferred_;
  features::Batch train_;
  features::Batch val_;
  std::optional<Network> teacher_;
  features::Batch source_;  // mmd_adapt
  std::unique_ptr<Tradaboost> boost_;

  int epoch_ = 0;
  double train_time_s_ = 0.0;
  std::optional<double> last_epoch_s_;
  std::vector<double> losses_;
};

}  // namespace modelps::trainer
