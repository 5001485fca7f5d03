#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "modelps/features/feature_store.h"
#include "modelps/repository/repository.h"
#include "modelps/trainer/train_config.h"

namespace modelps::genie {

// Constants of the simulated evaluator.
//   accuracy = clamp(base_scale * acc(model) + overlap_weight * overlap
//                    - lr_weight * (log10(lr) - lr_center)^2
//                    - k_weight * |K - floor(layers / 2)|
//                    + aug_bonus[preset] + method_bonus[method], 0, 1)
//   latency_ms   = latency_a * params * 1e-6 + latency_b
//   train_time_s = time_per_param_epoch * epochs * params
struct SurfaceConfig {
  double base_scale = 0.85;
  double overlap_weight = 0.1;
  double lr_weight = 0.04;
  double lr_center = -2.5;
  double k_weight = 0.02;
  double latency_a = 1.0;
  double latency_b = 0.05;
  double time_per_param_epoch = 1e-6;
  std::map<std::string, double> aug_bonus;
  std::map<std::string, double> method_bonus;

  static SurfaceConfig defaults();
  static SurfaceConfig from_json(const nlohmann::json& j);
  static SurfaceConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

double cost_model_latency_ms(const SurfaceConfig& s, std::int64_t params);

// Name of the augmentation preset a config uses ("none" when empty, "custom"
// for specs matching no preset).
std::string aug_preset_name(const trainer::TrainConfig& config);

class SimulatedEvaluator {
 public:
  SimulatedEvaluator(SurfaceConfig surface, const repo::Repository* repository,
                     const features::FeatureStore* features);

  // Deterministic in the config.
  trainer::ValidationReport evaluate(const trainer::TrainConfig& config) const;
  // Same surface for an explicit graph (used for non-executable graphs).
  trainer::ValidationReport evaluate(const trainer::TrainConfig& config,
                                     const graph::ModelGraph& graph) const;

  const SurfaceConfig& surface() const { return surface_; }

 private:
  SurfaceConfig surface_;
  const repo::Repository* repository_;
  const features::FeatureStore* features_;
};

}  // namespace modelps::genie
