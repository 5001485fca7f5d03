#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/graph/draft.h"
#include "modelps/graph/graph.h"
#include "modelps/repository/stores.h"
#include "modelps/repository/tensor_bundle.h"

namespace modelps::repo {

enum class Task { kImageClassification, kTextClassification, kTabularClassification };
enum class RecordStatus { kPublished, kDraft };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

struct ModelMetadata {
  std::string pretrained_dataset;
  double accuracy = 0.0;
  double latency_ms = 0.0;
  std::int64_t params = 0;
  std::optional<std::string> parent_model_id;
  // "uploaded" | "real" | "simulated"
  std::optional<std::string> evaluator;

  bool operator==(const ModelMetadata&) const = default;
};

struct ModelRecord {
  std::string model_id;
  std::string name;
  Task task = Task::kImageClassification;
  graph::ModelGraph graph;
  std::string weights_ref;
  ModelMetadata metadata;
  RecordStatus status = RecordStatus::kPublished;
  std::int64_t created_at = 0;
  std::int64_t updated_at = 0;
  std::string author;

  bool operator==(const ModelRecord&) const = default;
};

struct PublishRequest {
  std::string name;
  Task task = Task::kImageClassification;
  graph::ModelGraph graph;
  ModelMetadata metadata;
  std::string author;
};

struct DraftRecord {
  std::string draft_id;
  graph::Draft draft;
  std::string owner;
  std::int64_t last_saved = 0;
};

enum class SortKey { kModelId, kName, kAccuracy, kLatency, kParams, kCreatedAt };

struct Query {
  std::optional<Task> task;
  std::optional<std::string> name_contains;
  std::optional<double> min_accuracy;
  std::optional<double> max_latency_ms;
  std::optional<std::string> parent_model_id;
  SortKey sort = SortKey::kModelId;
  bool descending = false;
  std::optional<std::size_t> limit;
};

nlohmann::json to_json(const ModelMetadata& m);
// Throws MissingMetadata(field) when a required key is absent.
ModelMetadata metadata_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelRecord& r);
ModelRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DraftRecord& r);
Query query_from_json(const nlohmann::json& j);
SortKey sort_key_from_string(std::string_view name);

// Centralized model and draft store. Thread-safe: record inserts and draft
// saves are serialized; blobs are content-addressed and append-only.
class Repository {
 public:
  using Clock = std::function<std::int64_t()>;

  Repository(std::shared_ptr<DocumentStore> docs, std::shared_ptr<BlobStore> blobs,
             Clock clock = {});

  // Idempotent: identical (name, task, graph, weights, metadata) returns the
  // existing id.
  std::string publish(const PublishRequest& request,
                      std::span<const std::uint8_t> weights);

  ModelRecord get(const std::string& model_id) const;
  bool contains(const std::string& model_id) const;
  std::vector<ModelRecord> retrieve(const Query& query) const;
  std::size_t size() const;

  // Returns the raw weight blob, populating the local cache (unbounded).
  std::shared_ptr<const std::vector<std::uint8_t>> fetch_weights(
      const std::string& model_id) const;
  TensorBundle fetch_tensors(const std::string& model_id) const;
  std::size_t cached_blobs() const;

  // Saving bumps the stored revision by one. An existing draft only accepts
  // a save whose revision equals the stored one (optimistic lock).
  DraftRecord save_draft(const graph::Draft& draft,
                         const std::optional<std::string>& draft_id = std::nullopt,
                         const std::string& owner = "");
  DraftRecord load_draft(const std::string& draft_id) const;

  // Root-first ancestor chain ending at `model_id`.
  std::vector<ModelRecord> lineage(const std::string& model_id) const;

  DocumentStore& documents() { return *docs_; }
  BlobStore& blobs() { return *blobs_; }

 private:
  std::shared_ptr<DocumentStore> docs_;
  std::shared_ptr<BlobStore> blobs_;
  Clock clock_;

  mutable std::mutex mu_;
  std::map<std::string, ModelRecord> records_;
  mutable std::mutex draft_mu_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::string, std::shared_ptr<const std::vector<std::uint8_t>>> cache_;
};

}  // namespace modelps::repo
