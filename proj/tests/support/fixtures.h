#pragma once

#include <memory>

#include "modelps/features/feature_store.h"
#include "modelps/repository/repository.h"
#include "modelps/trainer/training_run.h"
#include "support/support.h"

namespace modelps::testing {

// In-memory repository plus bundled datasets.
struct World {
  std::unique_ptr<repo::Repository> repository = memory_repository();
  features::FeatureStore features;
  World() { features::register_bundled(features); }
  trainer::TrainingContext ctx() const { return {repository.get(), &features}; }
};

inline std::string publish_untrained(repo::Repository& r, const graph::ModelGraph& g,
                                     const std::string& name, const std::string& dataset,
                                     double accuracy = 0.5) {
  repo::PublishRequest p;
  p.name = name;
  p.task = repo::Task::kTabularClassification;
  p.graph = g;
  p.metadata.pretrained_dataset = dataset;
  p.metadata.accuracy = accuracy;
  p.metadata.latency_ms = 0.01;
  p.metadata.evaluator = "simulated";
  return r.publish(p, repo::encode_tensors(repo::TensorBundle{}));
}

// Trains `g` from scratch on `dataset` and publishes the weights.
inline std::string publish_pretrained(World& w, const graph::ModelGraph& g,
                                      const std::string& name, const std::string& dataset,
                                      int epochs = 5) {
  const std::string stub = publish_untrained(*w.repository, g, name + "-init", dataset);
  trainer::TrainConfig c;
  c.tl_method = trainer::TlMethod::kFromScratch;
  c.base_model_id = stub;
  c.dataset_id = dataset;
  c.epochs = epochs;
  c.lr = 0.05;
  c.seed = 7;
  trainer::TrainingRun run(w.ctx(), c);
  run.run();
  repo::PublishRequest p;
  p.name = name;
  p.task = repo::Task::kTabularClassification;
  p.graph = g;
  p.metadata.pretrained_dataset = dataset;
  p.metadata.accuracy = run.evaluate(features::Split::kVal);
  p.metadata.latency_ms = 0.01;
  p.metadata.evaluator = "real";
  return w.repository->publish(p, repo::encode_tensors(run.network().to_tensors()));
}

}  // namespace modelps::testing
