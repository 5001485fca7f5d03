#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/repository/repository.h"
#include "modelps/trainer/train_config.h"

namespace modelps::genie {

enum class Metric { kAccuracy, kLatencyMs, kTrainTimeS, kParams };
enum class CmpOp { kGe, kLe };
enum class Direction { kMaximize, kMinimize };
enum class Deployment { kCloud, kEdge };

std::string_view to_string(Metric m);
std::string_view to_string(CmpOp op);
std::string_view to_string(Direction d);
std::string_view to_string(Deployment d);
Metric metric_from_string(std::string_view s);
Deployment deployment_from_string(std::string_view s);

double metric_value(const trainer::ValidationReport& report, Metric metric);

struct Constraint {
  Metric metric = Metric::kAccuracy;
  CmpOp op = CmpOp::kGe;
  double value = 0.0;

  bool satisfied_by(const trainer::ValidationReport& report) const;
  bool operator==(const Constraint&) const = default;
};

struct Target {
  Metric metric = Metric::kAccuracy;
  Direction direction = Direction::kMaximize;

  bool operator==(const Target&) const = default;
};

struct GenieRequest {
  repo::Task task = repo::Task::kTabularClassification;
  Deployment deployment = Deployment::kCloud;
  std::vector<Constraint> constraints;
  std::vector<Target> targets;  // primary first
  int top_k = 5;
  int explore_budget = 50;
  std::string dataset_id;
  // Overrides the rule table when set.
  std::optional<trainer::TlMethod> tl_method;
  std::uint64_t seed = 0;

  bool operator==(const GenieRequest&) const = default;
};

// Throws InvalidArgument (top_k < 1, no targets, budget < 1).
void validate(const GenieRequest& request);
nlohmann::ordered_json to_json(const GenieRequest& request);
GenieRequest request_from_json(const nlohmann::json& j);

struct HistoryRecord {
  trainer::TrainConfig config;
  trainer::ValidationReport report;
  std::int64_t timestamp = 0;
  repo::Task task = repo::Task::kTabularClassification;
  // Pipeline method the record belongs to; differs from config.tl_method for
  // the fine-tune stage of a distillation pipeline.
  trainer::TlMethod method = trainer::TlMethod::kFineTune;
  std::string source = "validate";  // validate | job | explore | seed | ...
  std::string config_hash;

  bool operator==(const HistoryRecord&) const = default;
};

HistoryRecord make_record(const trainer::TrainConfig& config,
                          const trainer::ValidationReport& report, repo::Task task,
                          std::int64_t timestamp, std::string source,
                          std::optional<trainer::TlMethod> method = std::nullopt);
nlohmann::ordered_json to_json(const HistoryRecord& r);
HistoryRecord history_from_json(const nlohmann::json& j);

// sigma: every constraint holds, method matches, task and dataset match.
bool selects(const GenieRequest& request, trainer::TlMethod method, const HistoryRecord& r);
// tau: lexicographic in target order, then newer timestamp, then config hash.
bool ranks_before(const std::vector<Target>& targets, const HistoryRecord& a,
                  const HistoryRecord& b);

// Q := tau_T(sigma_{C, tl}(R)), truncated to top_k.
std::vector<HistoryRecord> search_history(const GenieRequest& request, trainer::TlMethod method,
                                          const std::vector<HistoryRecord>& history);

}  // namespace modelps::genie
