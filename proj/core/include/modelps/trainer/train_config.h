#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "modelps/features/augmentation.h"
#include "modelps/graph/graph.h"

namespace modelps::trainer {

enum class TlMethod { kFineTune, kKnowledgeDistill, kTradaboost, kMmdAdapt, kFromScratch };

std::string_view to_string(TlMethod method);
TlMethod tl_method_from_string(std::string_view name);

// Full specification of one transfer-learning run.
struct TrainConfig {
  TlMethod tl_method = TlMethod::kFineTune;
  // For knowledge_distill this is the teacher.
  std::string base_model_id;
  std::string dataset_id;
  // Labeled source data for tradaboost / mmd_adapt; defaults to the base
  // model's pretrained dataset.
  std::optional<std::string> source_dataset_id;
  // Edited graph to train instead of the base model's graph (for KD: the
  // student). Layers whose id and shape match the base keep its weights.
  std::optional<graph::ModelGraph> graph;
  features::AugmentationSpec aug;
  std::optional<std::string> aug_preset;
  double lr = 0.05;
  double momentum = 0.9;
  int epochs = 10;
  int batch_size = 32;
  int frozen_layers = 0;
  double kd_temperature = 4.0;
  double kd_alpha = 0.5;
  double mmd_weight = 0.1;
  // <= 0 selects the linear kernel.
  double mmd_gamma = 0.0;
  int boosting_rounds = 10;
  std::uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

std::span<const std::string_view> train_config_fields();

nlohmann::ordered_json to_json(const TrainConfig& config);
// Strict: unknown keys and type errors raise InvalidConfig with a
// JSON-pointer path.
TrainConfig train_config_from_json(const nlohmann::json& j);
// Overlays a partial config (e.g. a draft's pending_config) on `base`.
TrainConfig merge_partial(TrainConfig base, const nlohmann::json& partial);

// Domain checks; throws InvalidConfig(path, reason).
void validate(const TrainConfig& config);

// sha256 of the canonical JSON form.
std::string config_hash(const TrainConfig& config);

enum class EvaluatorKind { kReal, kSimulated };

struct ValidationReport {
  double accuracy = 0.0;  // on the val split
  double train_time_s = 0.0;
  double inference_latency_ms = 0.0;
  std::int64_t params = 0;
  int epochs_completed = 0;
  TrainConfig config;
  EvaluatorKind evaluator = EvaluatorKind::kReal;

  bool operator==(const ValidationReport&) const = default;
};

nlohmann::ordered_json to_json(const ValidationReport& report);
ValidationReport report_from_json(const nlohmann::json& j);

}  // namespace modelps::trainer
