#include "modelps/genie/query.h"

#include <algorithm>

#include "modelps/error.h"

namespace modelps::genie {
namespace {

[[noreturn]] void bad(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kInvalidArgument, "invalid request " + path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kAccuracy: return "accuracy";
    case Metric::kLatencyMs: return "latency_ms";
    case Metric::kTrainTimeS: return "train_time_s";
    case Metric::kParams: return "params";
  }
  return "?";
}

std::string_view to_string(CmpOp op) { return op == CmpOp::kGe ? ">=" : "<="; }
std::string_view to_string(Direction d) {
  return d == Direction::kMaximize ? "maximize" : "minimize";
}
std::string_view to_string(Deployment d) { return d == Deployment::kCloud ? "cloud" : "edge"; }

Metric metric_from_string(std::string_view s) {
  for (Metric m : {Metric::kAccuracy, Metric::kLatencyMs, Metric::kTrainTimeS, Metric::kParams}) {
    if (to_string(m) == s) return m;
  }
  bad("/metric", "unknown metric '" + std::string(s) + "'");
}

Deployment deployment_from_string(std::string_view s) {
  if (s == "cloud") return Deployment::kCloud;
  if (s == "edge") return Deployment::kEdge;
  bad("/deployment", "unknown deployment '" + std::string(s) + "'");
}

double metric_value(const trainer::ValidationReport& r, Metric m) {
  switch (m) {
    case Metric::kAccuracy: return r.accuracy;
    case Metric::kLatencyMs: return r.inference_latency_ms;
    case Metric::kTrainTimeS: return r.train_time_s;
    case Metric::kParams: return static_cast<double>(r.params);
  }
  return 0.0;
}

bool Constraint::satisfied_by(const trainer::ValidationReport& r) const {
  const double v = metric_value(r, metric);
  return op == CmpOp::kGe ? v >= value : v <= value;
}

void validate(const GenieRequest& r) {
  if (r.top_k < 1) bad("/top_k", "must be >= 1");
  if (r.targets.empty()) bad("/targets", "at least one target is required");
  if (r.explore_budget < 1) bad("/explore_budget", "must be >= 1");
  if (r.dataset_id.empty()) bad("/dataset_id", "required");
}

nlohmann::ordered_json to_json(const GenieRequest& r) {
  nlohmann::ordered_json j;
  j["task"] = repo::to_string(r.task);
  j["deployment"] = to_string(r.deployment);
  j["constraints"] = nlohmann::ordered_json::array();
  for (const auto& c : r.constraints) {
    j["constraints"].push_back(
        {{"metric", to_string(c.metric)}, {"op", to_string(c.op)}, {"value", c.value}});
  }
  j["targets"] = nlohmann::ordered_json::array();
  for (const auto& t : r.targets) {
    j["targets"].push_back({{"metric", to_string(t.metric)}, {"direction", to_string(t.direction)}});
  }
  j["top_k"] = r.top_k;
  j["explore_budget"] = r.explore_budget;
  j["dataset_id"] = r.dataset_id;
  if (r.tl_method) j["tl_method"] = trainer::to_string(*r.tl_method);
  j["seed"] = r.seed;
  return j;
}

GenieRequest request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("/", "expected object");
  static const std::vector<std::string> kKeys = {"task",     "deployment",     "constraints",
                                                 "targets",  "top_k",          "explore_budget",
                                                 "dataset_id", "tl_method",    "seed"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) bad("/" + k, "unknown field");
  }
  GenieRequest r;
  try {
    r.task = repo::task_from_string(j.at("task").get<std::string>());
    if (j.contains("deployment")) r.deployment = deployment_from_string(j["deployment"].get<std::string>());
    for (const auto& c : j.value("constraints", nlohmann::json::array())) {
      Constraint k;
      k.metric = metric_from_string(c.at("metric").get<std::string>());
      const std::string op = c.at("op");
      if (op == ">=" || op == "≥" || op == "ge") {
        k.op = CmpOp::kGe;
      } else if (op == "<=" || op == "≤" || op == "le") {
        k.op = CmpOp::kLe;
      } else {
        bad("/constraints/op", "unknown operator '" + op + "'");
      }
      k.value = c.at("value");
      r.constraints.push_back(k);
    }
    for (const auto& t : j.at("targets")) {
      Target k;
      k.metric = metric_from_string(t.at("metric").get<std::string>());
      const std::string d = t.value("direction", "maximize");
      if (d == "maximize") {
        k.direction = Direction::kMaximize;
      } else if (d == "minimize") {
        k.direction = Direction::kMinimize;
      } else {
        bad("/targets/direction", "unknown direction '" + d + "'");
      }
      r.targets.push_back(k);
    }
    r.top_k = j.value("top_k", 5);
    r.explore_budget = j.value("explore_budget", 50);
    r.dataset_id = j.at("dataset_id");
    if (j.contains("tl_method") && !j["tl_method"].is_null()) {
      r.tl_method = trainer::tl_method_from_string(j["tl_method"].get<std::string>());
    }
    r.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    bad("/", e.what());
  }
  validate(r);
  return r;
}

HistoryRecord make_record(const trainer::TrainConfig& config,
                          const trainer::ValidationReport& report, repo::Task task,
                          std::int64_t timestamp, std::string source,
                          std::optional<trainer::TlMethod> method) {
  HistoryRecord r;
  r.config = config;
  r.report = report;
  r.report.config = config;
  r.timestamp = timestamp;
  r.task = task;
  r.method = method.value_or(config.tl_method);
  r.source = std::move(source);
  r.config_hash = trainer::config_hash(config);
  return r;
}

nlohmann::ordered_json to_json(const HistoryRecord& r) {
  nlohmann::ordered_json j;
  j["timestamp"] = r.timestamp;
  j["task"] = repo::to_string(r.task);
  j["method"] = trainer::to_string(r.method);
  j["source"] = r.source;
  j["config_hash"] = r.config_hash;
  j["config"] = trainer::to_json(r.config);
  j["report"] = trainer::to_json(r.report);
  return j;
}

HistoryRecord history_from_json(const nlohmann::json& j) {
  HistoryRecord r;
  r.timestamp = j.at("timestamp");
  r.task = repo::task_from_string(j.at("task").get<std::string>());
  r.method = trainer::tl_method_from_string(j.at("method").get<std::string>());
  r.source = j.value("source", "validate");
  r.config = trainer::train_config_from_json(j.at("config"));
  r.report = trainer::report_from_json(j.at("report"));
  r.config_hash = j.value("config_hash", trainer::config_hash(r.config));
  return r;
}

bool selects(const GenieRequest& q, trainer::TlMethod method, const HistoryRecord& r) {
  if (r.method != method || r.task != q.task || r.config.dataset_id != q.dataset_id) return false;
  for (const auto& c : q.constraints) {
    if (!c.satisfied_by(r.report)) return false;
  }
  return true;
}

bool ranks_before(const std::vector<Target>& targets, const HistoryRecord& a,
                  const HistoryRecord& b) {
  for (const auto& t : targets) {
    const double va = metric_value(a.report, t.metric);
    const double vb = metric_value(b.report, t.metric);
    if (va == vb) continue;
    return t.direction == Direction::kMaximize ? va > vb : va < vb;
  }
  if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
  return a.config_hash < b.config_hash;
}

std::vector<HistoryRecord> search_history(const GenieRequest& q, trainer::TlMethod method,
                                          const std::vector<HistoryRecord>& history) {
  std::vector<const HistoryRecord*> hits;
  for (const auto& r : history) {
    if (selects(q, method, r)) hits.push_back(&r);
  }
  // Stable so that fully tied records keep history order.
  std::stable_sort(hits.begin(), hits.end(), [&](const HistoryRecord* a, const HistoryRecord* b) {
    return ranks_before(q.targets, *a, *b);
  });
  const std::size_t k = std::min(hits.size(), static_cast<std::size_t>(std::max(q.top_k, 0)));
  std::vector<HistoryRecord> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(*hits[i]);
  return out;
}

}  // namespace modelps::genie
