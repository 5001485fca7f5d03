#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/features/feature_store.h"
#include "modelps/genie/explore.h"
#include "modelps/genie/history.h"
#include "modelps/genie/query.h"
#include "modelps/genie/rules.h"
#include "modelps/genie/surface.h"
#include "modelps/repository/repository.h"

namespace modelps::genie {

enum class EvalMode { kAuto, kSimulated };

struct GenieContext {
  repo::Repository* repository = nullptr;
  features::FeatureStore* features = nullptr;
  HistoryLog* history = nullptr;
  RuleTable rules = RuleTable::defaults();
  SurfaceConfig surface = SurfaceConfig::defaults();
  // kAuto trains executable graphs for real and simulates the rest.
  EvalMode eval_mode = EvalMode::kAuto;
  int workers = 1;
  double trial_budget_s = 10.0;
  // Exploration runs when fewer than this many records qualify; defaults to
  // the request's top_k.
  std::optional<int> insufficient_threshold;
  std::string author = "genie";
};

// Base models: published task models the target dataset fits, by accuracy
// (cap 5). Datasets: target plus tag-related compatible ones.
SearchSpace propose_space(const GenieRequest& request, trainer::TlMethod method,
                          const repo::Repository& repository,
                          const features::FeatureStore& features);

struct RecommendationEntry {
  trainer::TrainConfig config;
  trainer::ValidationReport report;
  std::string provenance;  // "history" | "explored"
  std::int64_t timestamp = 0;
};

struct Recommendation {
  trainer::TlMethod tl_method = trainer::TlMethod::kFineTune;
  std::size_t history_hits = 0;
  bool explored = false;
  std::size_t trials = 0;
  std::vector<std::size_t> rung_sizes;
  // Distillation pipeline: the student published by the first stage.
  std::optional<std::string> student_model_id;
  std::vector<std::string> stages;
  std::vector<RecommendationEntry> entries;
};

nlohmann::ordered_json to_json(const Recommendation& r);

Recommendation genie(GenieContext& ctx, const GenieRequest& request);

}  // namespace modelps::genie
