#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/features/feature_store.h"
#include "modelps/genie/genie.h"
#include "modelps/genie/history.h"
#include "modelps/repository/repository.h"
#include "modelps/service/api_config.h"
#include "modelps/trainer/jobs.h"

namespace modelps::service {

// Store layout under ApiConfig::store_dir.
struct StorePaths {
  explicit StorePaths(const std::filesystem::path& root);

  std::filesystem::path root;
  std::filesystem::path blobs;        // <root>/blobs/<sha256>
  std::filesystem::path datasets;     // <root>/datasets/<id>.json (+ .csv)
  std::filesystem::path history;      // <root>/history.jsonl
  std::filesystem::path jobs;         // <root>/jobs/<id>.json, <id>.control
  std::filesystem::path checkpoints;  // <root>/checkpoints/<id>.bin + .json
};

// The backend behind the HTTP routes and the CLI. Every operation takes and
// returns JSON mirroring the domain types and throws modelps::Error.
class Service {
 public:
  explicit Service(ApiConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ApiConfig& config() const { return config_; }
  const StorePaths& paths() const { return paths_; }
  repo::Repository& repository() { return *repository_; }
  features::FeatureStore& features() { return *features_; }
  genie::HistoryLog& history() { return *history_; }
  trainer::JobManager& jobs() { return *jobs_; }
  const std::vector<std::string>& demo_models() const { return demo_models_; }

  // Models. The body carries name, task, graph, metadata, optional author and
  // either "weights_base64" (blob bytes) or "weights" ({"tensors": [...]}).
  nlohmann::json publish(const nlohmann::json& body);
  nlohmann::json list_models(const nlohmann::json& query);
  nlohmann::json get_model(const std::string& model_id);
  nlohmann::json lineage(const std::string& model_id);

  // Drafts: {"draft": {...}, "draft_id"?, "owner"?} or a bare draft.
  nlohmann::json save_draft(const nlohmann::json& body);
  nlohmann::json get_draft(const std::string& draft_id);

  // {"config": ..., "budget_s"?, "draft_id"?} or a bare config. The report
  // is appended to the history log.
  nlohmann::json validate(const nlohmann::json& body);

  // Training jobs; completion auto-publishes the model with its lineage.
  nlohmann::json start_job(const nlohmann::json& body);
  nlohmann::json job_action(const std::string& job_id, const std::string& action,
                            const nlohmann::json& body);
  nlohmann::json get_job(const std::string& job_id);
  bool wait_job(const std::string& job_id, double timeout_s);

  nlohmann::json list_datasets();
  // {"dataset_id"?, "name", "similarity_tags"?, "num_classes"?, and one of
  //  "generator": {kind, params, seed} | "csv_path" | "samples": {...}}.
  nlohmann::json register_dataset(const nlohmann::json& body);
  nlohmann::json preview(const std::string& dataset_id, const nlohmann::json& body);

  // Answers from history when enough records qualify; otherwise explores,
  // synchronously when `wait` is set, else as a ticket polled via get_job.
  // The boolean in the pair tells whether the answer is final.
  std::pair<nlohmann::json, bool> genie(const nlohmann::json& request, bool wait);

  // sha256 over every file in the store (temp and control files excluded).
  std::string state_hash() const;

  trainer::TrainConfig config_from_body(const nlohmann::json& body) const;

 private:
  struct Ticket {
    std::string id;
    std::string state = "Queued";
    std::optional<nlohmann::json> result;
    std::string reason;
    std::int64_t created_at = 0;
  };

  genie::GenieContext genie_context();
  std::optional<std::string> on_job_complete(const trainer::JobInfo& info,
                                             const trainer::TrainingRun& run);
  bool adopt_job(const std::string& job_id);
  repo::Task task_for(const trainer::TrainConfig& config) const;

  ApiConfig config_;
  StorePaths paths_;
  std::unique_ptr<repo::Repository> repository_;
  std::unique_ptr<features::FeatureStore> features_;
  std::unique_ptr<genie::HistoryLog> history_;
  genie::RuleTable rules_;
  genie::SurfaceConfig surface_;
  std::vector<std::string> demo_models_;

  std::mutex genie_mu_;  // one exploration at a time
  std::mutex ticket_mu_;
  std::map<std::string, Ticket> tickets_;
  std::vector<std::thread> ticket_threads_;

  std::unique_ptr<trainer::JobManager> jobs_;  // last: its workers use the above
};

}  // namespace modelps::service
