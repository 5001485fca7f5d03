#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "modelps/features/augmentation.h"
#include "modelps/trainer/network.h"
#include "modelps/trainer/train_config.h"

namespace modelps::trainer {

// Weighted vote over learners; each vote carries weight ln(1/beta_t).
struct Ensemble {
  std::vector<Network> learners;
  std::vector<double> votes;

  std::vector<int> predict(std::span<const double> x, std::size_t n) const;
  double accuracy(const features::Batch& batch) const;
  std::int64_t param_count() const;
  // Learner with the largest vote.
  const Network& strongest() const;
};

struct BoostRound {
  double epsilon = 0.0;
  double beta_t = 0.0;
  bool accepted = false;
  int source_errors = 0;
  int target_errors = 0;
  double vote = 0.0;  // ln(1/beta_t) for accepted learners
};

// Classic TrAdaBoost over a labeled source set and a small target set. Each
// round trains a fresh copy of `init` on the weighted union.
class Tradaboost {
 public:
  enum class StepOutcome { kContinue, kStopped, kAborted };

  Tradaboost(features::Batch source, features::Batch target, int num_classes, Network init,
             TrainConfig config);

  // Trains one learner and updates instance weights. `should_abort` is polled
  // at batch boundaries; an aborted step leaves the state untouched.
  StepOutcome step(const std::function<bool()>& should_abort = {});

  bool done() const { return done_; }
  int rounds_done() const { return static_cast<int>(rounds_.size()); }
  int total_rounds() const { return config_.boosting_rounds; }
  double beta() const { return beta_; }
  const std::vector<double>& source_weights() const { return source_w_; }
  const std::vector<double>& target_weights() const { return target_w_; }
  const std::vector<BoostRound>& rounds() const { return rounds_; }
  const std::vector<Network>& learners() const { return learners_; }

  // Last ceil(N/2) accepted learners, N = accepted count.
  Ensemble ensemble() const;

  // Checkpoint support.
  struct State {
    std::vector<double> source_w;
    std::vector<double> target_w;
    std::vector<BoostRound> rounds;
    std::vector<Network> learners;  // accepted learners, in round order
    bool done = false;
  };
  State state() const;
  void set_state(State state);

 private:
  features::Batch source_;
  features::Batch target_;
  int num_classes_;
  Network init_;
  TrainConfig config_;
  double beta_;
  std::vector<double> source_w_;
  std::vector<double> target_w_;
  std::vector<BoostRound> rounds_;
  std::vector<Network> learners_;
  bool done_ = false;
};

}  // namespace modelps::trainer
