#include "modelps/genie/rules.h"

#include <algorithm>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::genie {

bool Rule::matches(const RuleInputs& in) const {
  if (deployment && in.deployment != *deployment) return false;
  if (latency_bound_le && !(in.latency_bound_ms && *in.latency_bound_ms <= *latency_bound_le)) {
    return false;
  }
  if (target_train_lt && !(in.target_train_n < *target_train_lt)) return false;
  if (related_source_ge && !(in.related_source_overlap >= *related_source_ge)) return false;
  if (tag_overlap_ge && !(in.model_overlap >= *tag_overlap_ge)) return false;
  return true;
}

RuleTable RuleTable::defaults() {
  RuleTable t;
  using trainer::TlMethod;
  Rule edge;
  edge.deployment = Deployment::kEdge;
  edge.method = TlMethod::kKnowledgeDistill;
  Rule latency;
  latency.latency_bound_le = 1.0;
  latency.method = TlMethod::kKnowledgeDistill;
  Rule small;
  small.target_train_lt = 200;
  small.related_source_ge = 0.3;
  small.method = TlMethod::kTradaboost;
  Rule overlap;
  overlap.tag_overlap_ge = 0.5;
  overlap.method = TlMethod::kFineTune;
  t.rules = {edge, latency, small, overlap};
  t.otherwise = TlMethod::kMmdAdapt;
  return t;
}

RuleTable RuleTable::from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& reason) -> Error {
    return Error(ErrorCode::kInvalidArgument, "invalid rule table: " + reason);
  };
  RuleTable t;
  try {
    for (const auto& r : j.at("rules")) {
      Rule rule;
      rule.method = trainer::tl_method_from_string(r.at("method").get<std::string>());
      const auto& w = r.value("when", nlohmann::json::object());
      for (const auto& [k, v] : w.items()) {
        if (k == "deployment") {
          rule.deployment = deployment_from_string(v.get<std::string>());
        } else if (k == "latency_bound_le") {
          rule.latency_bound_le = v.get<double>();
        } else if (k == "target_train_lt") {
          rule.target_train_lt = v.get<std::size_t>();
        } else if (k == "related_source_ge") {
          rule.related_source_ge = v.get<double>();
        } else if (k == "tag_overlap_ge") {
          rule.tag_overlap_ge = v.get<double>();
        } else {
          throw bad("unknown condition '" + k + "'");
        }
      }
      t.rules.push_back(rule);
    }
    t.otherwise = trainer::tl_method_from_string(j.value("otherwise", std::string("mmd_adapt")));
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
  return t;
}

RuleTable RuleTable::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(read_file_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "cannot parse " + path + ": " + e.what());
  }
}

nlohmann::ordered_json RuleTable::to_json() const {
  nlohmann::ordered_json j;
  j["rules"] = nlohmann::ordered_json::array();
  for (const auto& r : rules) {
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    if (r.deployment) w["deployment"] = genie::to_string(*r.deployment);
    if (r.latency_bound_le) w["latency_bound_le"] = *r.latency_bound_le;
    if (r.target_train_lt) w["target_train_lt"] = *r.target_train_lt;
    if (r.related_source_ge) w["related_source_ge"] = *r.related_source_ge;
    if (r.tag_overlap_ge) w["tag_overlap_ge"] = *r.tag_overlap_ge;
    j["rules"].push_back({{"when", w}, {"method", trainer::to_string(r.method)}});
  }
  j["otherwise"] = trainer::to_string(otherwise);
  return j;
}

trainer::TlMethod RuleTable::recommend(const RuleInputs& in) const {
  for (const auto& r : rules) {
    if (r.matches(in)) return r.method;
  }
  return otherwise;
}

RuleInputs rule_inputs(const GenieRequest& q, const repo::Repository& repository,
                       const features::FeatureStore& features) {
  RuleInputs in;
  in.deployment = q.deployment;
  for (const auto& c : q.constraints) {
    if (c.metric == Metric::kLatencyMs && c.op == CmpOp::kLe) {
      in.latency_bound_ms = in.latency_bound_ms ? std::min(*in.latency_bound_ms, c.value) : c.value;
    }
  }
  if (!features.contains(q.dataset_id)) {
    throw Error(ErrorCode::kUnknownDataset, "unknown dataset '" + q.dataset_id + "'",
                {{"dataset_id", q.dataset_id}});
  }
  const auto target = features.get(q.dataset_id);
  in.target_train_n = target.splits.train_n;
  for (const auto& d : features.list()) {
    if (d.dataset_id == target.dataset_id || d.feature_shape != target.feature_shape ||
        d.num_classes != target.num_classes) {
      continue;
    }
    in.related_source_overlap =
        std::max(in.related_source_overlap, features::tag_overlap(d.similarity_tags, target.similarity_tags));
  }
  repo::Query mq;
  mq.task = q.task;
  for (const auto& m : repository.retrieve(mq)) {
    if (!features.contains(m.metadata.pretrained_dataset)) continue;
    const auto pre = features.get(m.metadata.pretrained_dataset);
    in.model_overlap =
        std::max(in.model_overlap, features::tag_overlap(pre.similarity_tags, target.similarity_tags));
  }
  return in;
}

trainer::TlMethod recommend_tl_method(const GenieRequest& q, const RuleTable& rules,
                                      const repo::Repository& repository,
                                      const features::FeatureStore& features) {
  if (q.tl_method) return *q.tl_method;
  return rules.recommend(rule_inputs(q, repository, features));
}

}  // namespace modelps::genie
