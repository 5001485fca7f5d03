#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/features/feature_store.h"
#include "modelps/genie/query.h"
#include "modelps/repository/repository.h"

namespace modelps::genie {

// Facts about a request that the rule table conditions on.
struct RuleInputs {
  Deployment deployment = Deployment::kCloud;
  // Tightest "latency_ms <=" bound among the constraints.
  std::optional<double> latency_bound_ms;
  std::size_t target_train_n = 0;
  // Best tag overlap between the target and another compatible dataset.
  double related_source_overlap = 0.0;
  // Best tag overlap between the target and a candidate model's
  // pretraining dataset.
  double model_overlap = 0.0;
};

// Ordered rules; the first whose conditions all hold picks the method. Keys
// of "when": deployment, latency_bound_le, target_train_lt,
// related_source_ge, tag_overlap_ge. An empty "when" always matches.
struct Rule {
  std::optional<Deployment> deployment;
  std::optional<double> latency_bound_le;
  std::optional<std::size_t> target_train_lt;
  std::optional<double> related_source_ge;
  std::optional<double> tag_overlap_ge;
  trainer::TlMethod method = trainer::TlMethod::kFineTune;

  bool matches(const RuleInputs& in) const;
};

struct RuleTable {
  std::vector<Rule> rules;
  // Fallback if no rule matches.
  trainer::TlMethod otherwise = trainer::TlMethod::kMmdAdapt;

  static RuleTable defaults();
  static RuleTable from_json(const nlohmann::json& j);
  static RuleTable load(const std::string& path);
  nlohmann::ordered_json to_json() const;

  trainer::TlMethod recommend(const RuleInputs& in) const;
};

RuleInputs rule_inputs(const GenieRequest& request, const repo::Repository& repository,
                       const features::FeatureStore& features);

trainer::TlMethod recommend_tl_method(const GenieRequest& request, const RuleTable& rules,
                                      const repo::Repository& repository,
                                      const features::FeatureStore& features);

}  // namespace modelps::genie
