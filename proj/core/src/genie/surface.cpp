#include "modelps/genie/surface.h"

#include <algorithm>
#include <cmath>

#include "modelps/error.h"
#include "modelps/trainer/validator.h"
#include "modelps/util.h"

namespace modelps::genie {

SurfaceConfig SurfaceConfig::defaults() {
  SurfaceConfig s;
  s.aug_bonus = {{"none", 0.0},          {"noise-0.01", 0.005},  {"noise-0.02", 0.01},
                 {"noise-0.05", 0.02},   {"noise-0.1", 0.015},   {"noise-0.2", -0.01},
                 {"dropout-0.05", 0.01}, {"dropout-0.1", 0.012}, {"dropout-0.2", 0.0},
                 {"noise-0.05+dropout-0.05", 0.03}};
  s.method_bonus = {{"fine_tune", 0.0},    {"knowledge_distill", -0.02}, {"tradaboost", -0.01},
                    {"mmd_adapt", -0.01},  {"from_scratch", -0.15}};
  return s;
}

SurfaceConfig SurfaceConfig::from_json(const nlohmann::json& j) {
  SurfaceConfig s = defaults();
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "base_scale") s.base_scale = v;
      else if (k == "overlap_weight") s.overlap_weight = v;
      else if (k == "lr_weight") s.lr_weight = v;
      else if (k == "lr_center") s.lr_center = v;
      else if (k == "k_weight") s.k_weight = v;
      else if (k == "latency_a") s.latency_a = v;
      else if (k == "latency_b") s.latency_b = v;
      else if (k == "time_per_param_epoch") s.time_per_param_epoch = v;
      else if (k == "aug_bonus") s.aug_bonus = v.get<std::map<std::string, double>>();
      else if (k == "method_bonus") s.method_bonus = v.get<std::map<std::string, double>>();
      else throw Error(ErrorCode::kInvalidArgument, "unknown surface constant '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid surface config: ") + e.what());
  }
  return s;
}

SurfaceConfig SurfaceConfig::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(read_file_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "cannot parse " + path + ": " + e.what());
  }
}

nlohmann::ordered_json SurfaceConfig::to_json() const {
  nlohmann::ordered_json j;
  j["base_scale"] = base_scale;
  j["overlap_weight"] = overlap_weight;
  j["lr_weight"] = lr_weight;
  j["lr_center"] = lr_center;
  j["k_weight"] = k_weight;
  j["latency_a"] = latency_a;
  j["latency_b"] = latency_b;
  j["time_per_param_epoch"] = time_per_param_epoch;
  j["aug_bonus"] = aug_bonus;
  j["method_bonus"] = method_bonus;
  return j;
}

double cost_model_latency_ms(const SurfaceConfig& s, std::int64_t params) {
  return s.latency_a * static_cast<double>(params) * 1e-6 + s.latency_b;
}

std::string aug_preset_name(const trainer::TrainConfig& c) {
  if (c.aug_preset) return *c.aug_preset;
  if (c.aug.empty()) return "none";
  for (const auto& name : features::augmentation_presets()) {
    auto p = features::augmentation_preset(name);
    if (p.steps == c.aug.steps) return name;
  }
  return "custom";
}

SimulatedEvaluator::SimulatedEvaluator(SurfaceConfig surface, const repo::Repository* repository,
                                       const features::FeatureStore* features)
    : surface_(std::move(surface)), repository_(repository), features_(features) {}

trainer::ValidationReport SimulatedEvaluator::evaluate(const trainer::TrainConfig& c) const {
  trainer::TrainingContext ctx{repository_, features_};
  return evaluate(c, trainer::resolve_graph(ctx, c));
}

trainer::ValidationReport SimulatedEvaluator::evaluate(const trainer::TrainConfig& c,
                                                       const graph::ModelGraph& g) const {
  double model_acc = 0.5;
  std::vector<std::string> pre_tags;
  if (repository_ && repository_->contains(c.base_model_id)) {
    const auto m = repository_->get(c.base_model_id);
    model_acc = m.metadata.accuracy;
    if (features_ && features_->contains(m.metadata.pretrained_dataset)) {
      pre_tags = features_->get(m.metadata.pretrained_dataset).similarity_tags;
    }
  }
  double overlap = 0.0;
  if (features_ && features_->contains(c.dataset_id)) {
    overlap = features::tag_overlap(pre_tags, features_->get(c.dataset_id).similarity_tags);
  }
  const auto layers = static_cast<int>(graph::parameterized_layers(g).size());
  const int k_star = layers / 2;
  const double dl = std::log10(c.lr) - surface_.lr_center;
  auto bonus = [](const std::map<std::string, double>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? 0.0 : it->second;
  };
  double acc = surface_.base_scale * model_acc + surface_.overlap_weight * overlap -
               surface_.lr_weight * dl * dl -
               surface_.k_weight * std::abs(c.frozen_layers - k_star) +
               bonus(surface_.aug_bonus, aug_preset_name(c)) +
               bonus(surface_.method_bonus, std::string(trainer::to_string(c.tl_method)));
  trainer::ValidationReport r;
  r.accuracy = std::clamp(acc, 0.0, 1.0);
  r.params = graph::count_params(g);
  r.inference_latency_ms = cost_model_latency_ms(surface_, r.params);
  r.train_time_s = surface_.time_per_param_epoch * c.epochs * static_cast<double>(r.params);
  r.epochs_completed = c.epochs;
  r.config = c;
  r.evaluator = trainer::EvaluatorKind::kSimulated;
  return r;
}

}  // namespace modelps::genie
