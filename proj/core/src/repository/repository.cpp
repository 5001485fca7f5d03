#include "modelps/repository/repository.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::repo {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kModels = "models";
constexpr const char* kDrafts = "drafts";

json plain(const ordered_json& j) { return json::parse(j.dump()); }

[[noreturn]] void missing(const std::string& field) {
  throw Error(ErrorCode::kMissingMetadata, "missing metadata field '" + field + "'",
              {{"field", field}});
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kImageClassification: return "image_classification";
    case Task::kTextClassification: return "text_classification";
    case Task::kTabularClassification: return "tabular_classification";
  }
  return "image_classification";
}

Task task_from_string(std::string_view name) {
  if (name == "image_classification") return Task::kImageClassification;
  if (name == "text_classification") return Task::kTextClassification;
  if (name == "tabular_classification") return Task::kTabularClassification;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'",
              {{"path", "/task"}});
}

SortKey sort_key_from_string(std::string_view name) {
  if (name == "model_id") return SortKey::kModelId;
  if (name == "name") return SortKey::kName;
  if (name == "accuracy") return SortKey::kAccuracy;
  if (name == "latency_ms") return SortKey::kLatency;
  if (name == "params") return SortKey::kParams;
  if (name == "created_at") return SortKey::kCreatedAt;
  throw Error(ErrorCode::kInvalidArgument, "unknown sort key '" + std::string(name) + "'",
              {{"path", "/sort"}});
}

json to_json(const ModelMetadata& m) {
  json j = {{"pretrained_dataset", m.pretrained_dataset},
            {"accuracy", m.accuracy},
            {"latency_ms", m.latency_ms},
            {"params", m.params}};
  j["parent_model_id"] = m.parent_model_id ? json(*m.parent_model_id) : json(nullptr);
  if (m.evaluator) j["evaluator"] = *m.evaluator;
  return j;
}

ModelMetadata metadata_from_json(const json& j) {
  if (!j.is_object()) missing("metadata");
  ModelMetadata m;
  for (const char* f : {"pretrained_dataset", "accuracy", "latency_ms"}) {
    if (!j.contains(f) || j[f].is_null()) missing(f);
  }
  try {
    m.pretrained_dataset = j.at("pretrained_dataset").get<std::string>();
    m.accuracy = j.at("accuracy").get<double>();
    m.latency_ms = j.at("latency_ms").get<double>();
    m.params = j.value("params", std::int64_t{0});
    if (j.contains("parent_model_id") && !j["parent_model_id"].is_null()) {
      m.parent_model_id = j["parent_model_id"].get<std::string>();
    }
    if (j.contains("evaluator") && !j["evaluator"].is_null()) {
      m.evaluator = j["evaluator"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed metadata: ") + e.what(),
                {{"path", "/metadata"}});
  }
  return m;
}

json to_json(const ModelRecord& r) {
  return {{"model_id", r.model_id},
          {"name", r.name},
          {"task", std::string(to_string(r.task))},
          {"graph", plain(graph::to_json(r.graph))},
          {"weights_ref", r.weights_ref},
          {"metadata", to_json(r.metadata)},
          {"status", r.status == RecordStatus::kPublished ? "published" : "draft"},
          {"created_at", r.created_at},
          {"updated_at", r.updated_at},
          {"author", r.author}};
}

ModelRecord record_from_json(const json& j) {
  ModelRecord r;
  r.model_id = j.at("model_id").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.task = task_from_string(j.at("task").get<std::string>());
  r.graph = graph::graph_from_json(j.at("graph"), "/graph");
  r.weights_ref = j.at("weights_ref").get<std::string>();
  r.metadata = metadata_from_json(j.at("metadata"));
  r.status = j.at("status").get<std::string>() == "draft" ? RecordStatus::kDraft
                                                          : RecordStatus::kPublished;
  r.created_at = j.at("created_at").get<std::int64_t>();
  r.updated_at = j.at("updated_at").get<std::int64_t>();
  r.author = j.value("author", "");
  return r;
}

json to_json(const DraftRecord& r) {
  return {{"draft_id", r.draft_id},
          {"draft", plain(graph::draft_to_json(r.draft))},
          {"owner", r.owner},
          {"last_saved", r.last_saved}};
}

Query query_from_json(const json& j) {
  Query q;
  try {
    if (j.contains("task")) q.task = task_from_string(j["task"].get<std::string>());
    if (j.contains("name")) q.name_contains = j["name"].get<std::string>();
    if (j.contains("min_accuracy")) q.min_accuracy = j["min_accuracy"].get<double>();
    if (j.contains("max_latency_ms")) q.max_latency_ms = j["max_latency_ms"].get<double>();
    if (j.contains("parent_model_id")) q.parent_model_id = j["parent_model_id"].get<std::string>();
    if (j.contains("sort")) q.sort = sort_key_from_string(j["sort"].get<std::string>());
    if (j.contains("descending")) q.descending = j["descending"].get<bool>();
    if (j.contains("limit")) q.limit = j["limit"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed query: ") + e.what());
  }
  return q;
}

Repository::Repository(std::shared_ptr<DocumentStore> docs,
                       std::shared_ptr<BlobStore> blobs, Clock clock)
    : docs_(std::move(docs)), blobs_(std::move(blobs)), clock_(std::move(clock)) {
  if (!clock_) clock_ = now_ms;
  for (const auto& id : docs_->list(kModels)) {
    auto doc = docs_->get(kModels, id);
    if (!doc) continue;
    try {
      records_.emplace(id, record_from_json(*doc));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStoreCorrupt, "corrupt model record '" + id + "'",
                  {{"path", std::string(kModels) + "/" + id + ".json"},
                   {"reason", e.what()}});
    }
  }
}

std::string Repository::publish(const PublishRequest& request,
                                std::span<const std::uint8_t> weights) {
  try {
    graph::validate(request.graph);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidGraph, std::string("cannot publish: ") + e.what(),
                {{"cause", e.to_json()}});
  }
  if (request.name.empty()) missing("name");
  const ModelMetadata& m = request.metadata;
  if (m.pretrained_dataset.empty()) missing("pretrained_dataset");
  if (!std::isfinite(m.accuracy) || m.accuracy < 0.0 || m.accuracy > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "accuracy must lie in [0,1]",
                {{"path", "/metadata/accuracy"}});
  }
  if (!std::isfinite(m.latency_ms) || m.latency_ms < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "latency_ms must be non-negative",
                {{"path", "/metadata/latency_ms"}});
  }
  if (weights.empty()) missing("weights");

  ModelMetadata meta = m;
  meta.params = graph::count_params(request.graph);

  std::lock_guard lock(mu_);
  if (meta.parent_model_id && !records_.count(*meta.parent_model_id)) {
    throw Error(ErrorCode::kDanglingParent,
                "parent model '" + *meta.parent_model_id + "' does not exist",
                {{"parent_model_id", *meta.parent_model_id}});
  }
  const std::string weights_ref = sha256_hex(weights);
  ordered_json identity = {{"name", request.name},
                           {"task", std::string(to_string(request.task))},
                           {"graph", graph::to_json(request.graph)},
                           {"weights_ref", weights_ref},
                           {"metadata", ordered_json::parse(to_json(meta).dump())}};
  const std::string id = "m-" + sha256_hex(identity.dump()).substr(0, 16);
  if (records_.count(id)) return id;

  blobs_->put(weights);
  ModelRecord r;
  r.model_id = id;
  r.name = request.name;
  r.task = request.task;
  r.graph = request.graph;
  r.weights_ref = weights_ref;
  r.metadata = std::move(meta);
  r.status = RecordStatus::kPublished;
  r.created_at = r.updated_at = clock_();
  r.author = request.author;
  docs_->put(kModels, id, to_json(r));
  records_.emplace(id, std::move(r));
  return id;
}

ModelRecord Repository::get(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(model_id);
  if (it == records_.end()) {
    throw Error(ErrorCode::kUnknownModel, "unknown model '" + model_id + "'",
                {{"model_id", model_id}});
  }
  return it->second;
}

bool Repository::contains(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  return records_.count(model_id) > 0;
}

std::size_t Repository::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::vector<ModelRecord> Repository::retrieve(const Query& q) const {
  std::vector<ModelRecord> out;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, r] : records_) {
      if (q.task && r.task != *q.task) continue;
      if (q.name_contains && r.name.find(*q.name_contains) == std::string::npos) continue;
      if (q.min_accuracy && r.metadata.accuracy < *q.min_accuracy) continue;
      if (q.max_latency_ms && r.metadata.latency_ms > *q.max_latency_ms) continue;
      if (q.parent_model_id && r.metadata.parent_model_id != q.parent_model_id) continue;
      out.push_back(r);
    }
  }
  auto key_less = [&](const ModelRecord& a, const ModelRecord& b) -> int {
    auto cmp = [](const auto& x, const auto& y) { return x < y ? -1 : (y < x ? 1 : 0); };
    switch (q.sort) {
      case SortKey::kModelId: return 0;
      case SortKey::kName: return cmp(a.name, b.name);
      case SortKey::kAccuracy: return cmp(a.metadata.accuracy, b.metadata.accuracy);
      case SortKey::kLatency: return cmp(a.metadata.latency_ms, b.metadata.latency_ms);
      case SortKey::kParams: return cmp(a.metadata.params, b.metadata.params);
      case SortKey::kCreatedAt: return cmp(a.created_at, b.created_at);
    }
    return 0;
  };
  std::sort(out.begin(), out.end(), [&](const ModelRecord& a, const ModelRecord& b) {
    int c = key_less(a, b);
    if (c != 0) return q.descending ? c > 0 : c < 0;
    return q.descending ? a.model_id > b.model_id : a.model_id < b.model_id;
  });
  if (q.limit && out.size() > *q.limit) out.resize(*q.limit);
  return out;
}

std::shared_ptr<const std::vector<std::uint8_t>> Repository::fetch_weights(
    const std::string& model_id) const {
  const std::string ref = get(model_id).weights_ref;
  std::lock_guard lock(cache_mu_);
  auto it = cache_.find(ref);
  if (it != cache_.end()) return it->second;
  auto bytes = blobs_->get(ref);
  if (!bytes) {
    throw Error(ErrorCode::kStoreCorrupt, "missing weight blob " + ref,
                {{"path", "blobs/" + ref}});
  }
  auto ptr = std::make_shared<const std::vector<std::uint8_t>>(std::move(*bytes));
  cache_.emplace(ref, ptr);
  return ptr;
}

TensorBundle Repository::fetch_tensors(const std::string& model_id) const {
  auto bytes = fetch_weights(model_id);
  return decode_tensors(*bytes);
}

std::size_t Repository::cached_blobs() const {
  std::lock_guard lock(cache_mu_);
  return cache_.size();
}

DraftRecord Repository::save_draft(const graph::Draft& draft,
                                   const std::optional<std::string>& draft_id,
                                   const std::string& owner) {
  graph::validate(draft.graph);
  std::lock_guard lock(draft_mu_);
  DraftRecord rec;
  rec.draft_id = draft_id.value_or(random_id("d"));
  rec.owner = owner.empty() ? draft.author : owner;
  rec.draft = draft;
  if (auto existing = docs_->get(kDrafts, rec.draft_id)) {
    const std::int64_t stored = (*existing)["draft"]["revision"].get<std::int64_t>();
    if (draft.revision != stored) {
      throw Error(ErrorCode::kStaleRevision,
                  "draft '" + rec.draft_id + "' is at revision " + std::to_string(stored) +
                      ", save was based on revision " + std::to_string(draft.revision),
                  {{"draft_id", rec.draft_id},
                   {"stored_revision", stored},
                   {"revision", draft.revision}});
    }
    if (owner.empty()) rec.owner = (*existing).value("owner", rec.owner);
  }
  rec.draft.revision = draft.revision + 1;
  rec.last_saved = clock_();
  docs_->put(kDrafts, rec.draft_id, to_json(rec));
  return rec;
}

DraftRecord Repository::load_draft(const std::string& draft_id) const {
  std::optional<json> doc;
  try {
    doc = docs_->get(kDrafts, draft_id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) doc.reset();
    else throw;
  }
  if (!doc) {
    throw Error(ErrorCode::kUnknownDraft, "unknown draft '" + draft_id + "'",
                {{"draft_id", draft_id}});
  }
  DraftRecord r;
  r.draft_id = (*doc)["draft_id"].get<std::string>();
  r.draft = graph::parse_draft((*doc)["draft"].dump());
  r.owner = doc->value("owner", "");
  r.last_saved = doc->value("last_saved", std::int64_t{0});
  return r;
}

std::vector<ModelRecord> Repository::lineage(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  std::vector<ModelRecord> chain;
  std::set<std::string> visited;
  std::optional<std::string> cur = model_id;
  while (cur) {
    auto it = records_.find(*cur);
    if (it == records_.end()) {
      if (chain.empty()) {
        throw Error(ErrorCode::kUnknownModel, "unknown model '" + *cur + "'",
                    {{"model_id", *cur}});
      }
      throw Error(ErrorCode::kDanglingParent, "ancestor '" + *cur + "' is missing",
                  {{"parent_model_id", *cur}});
    }
    if (!visited.insert(*cur).second) {
      throw Error(ErrorCode::kLineageCycle, "lineage of '" + model_id + "' is cyclic",
                  {{"model_id", model_id}, {"repeated", *cur}});
    }
    chain.push_back(it->second);
    cur = it->second.metadata.parent_model_id;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace modelps::repo
