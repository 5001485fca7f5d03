#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/genie/history.h"
#include "modelps/genie/query.h"
#include "modelps/genie/surface.h"
#include "modelps/trainer/training_run.h"

namespace modelps::genie {

struct SearchSpace {
  std::vector<std::string> base_models;  // best first
  std::vector<std::string> datasets;     // target first, then related sources
  std::vector<std::string> aug_presets;
  trainer::TlMethod tl_method = trainer::TlMethod::kFineTune;
  double lr_min = 1e-4;
  double lr_max = 1e-1;
  // Largest K per base model (its parameterized layer count).
  std::map<std::string, int> k_max;
  int epochs_min = 1;
  int epochs_max = 20;
};

nlohmann::ordered_json to_json(const SearchSpace& space);

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual trainer::ValidationReport evaluate(const trainer::TrainConfig& config) const = 0;
};

class SurfaceEvaluator : public Evaluator {
 public:
  explicit SurfaceEvaluator(SimulatedEvaluator sim) : sim_(std::move(sim)) {}
  trainer::ValidationReport evaluate(const trainer::TrainConfig& config) const override {
    return sim_.evaluate(config);
  }

 private:
  SimulatedEvaluator sim_;
};

// Real time-boxed training for executable graphs, the surface otherwise.
class TrainerEvaluator : public Evaluator {
 public:
  TrainerEvaluator(trainer::TrainingContext ctx, SimulatedEvaluator sim, double budget_s)
      : ctx_(ctx), sim_(std::move(sim)), budget_s_(budget_s) {}
  trainer::ValidationReport evaluate(const trainer::TrainConfig& config) const override;

 private:
  trainer::TrainingContext ctx_;
  SimulatedEvaluator sim_;
  double budget_s_;
};

struct Trial {
  std::size_t index = 0;  // sampled-config index
  int rung = 0;
  trainer::TrainConfig config;
  std::optional<trainer::ValidationReport> report;  // empty when the trial failed
  std::string error;
};

struct ExploreOptions {
  int workers = 1;
  HistoryLog* history = nullptr;
  repo::Task task = repo::Task::kTabularClassification;
  // Pipeline method recorded with each trial (defaults to the config's).
  std::optional<trainer::TlMethod> record_method;
  std::string record_source = "explore";
};

struct ExploreResult {
  std::vector<Trial> trials;             // evaluation order
  std::vector<std::size_t> rung_sizes;   // configs evaluated per rung
  std::vector<HistoryRecord> records;    // what was appended, same order
};

// Configs alive per successive-halving rung with eta = 3: ceil(n / 3^i) until
// one remains (9 -> 3 -> 1).
std::vector<std::size_t> halving_schedule(std::size_t n);
// Epochs for rung i of R: max(1, round(full / 3^(R-1-i))); the last rung
// trains the full count.
int rung_epochs(int full_epochs, std::size_t rung, std::size_t rungs);

// Seeded random sample from the space around `base` (dataset, batch size and
// other fixed fields come from `base`).
std::vector<trainer::TrainConfig> sample_configs(const SearchSpace& space,
                                                 const trainer::TrainConfig& base,
                                                 std::size_t n, std::uint64_t seed);

// Random search of `budget` configs followed by successive halving on the
// request's primary target.
ExploreResult explore(const GenieRequest& request, const SearchSpace& space,
                      const Evaluator& evaluator, int budget, const ExploreOptions& options = {});

}  // namespace modelps::genie
