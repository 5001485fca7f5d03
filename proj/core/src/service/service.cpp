#include "modelps/service/service.h"

#include <algorithm>
#include <fstream>

#include "modelps/error.h"
#include "modelps/graph/draft.h"
#include "modelps/service/seed.h"
#include "modelps/trainer/validator.h"
#include "modelps/util.h"

namespace modelps::service {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kJobs = "jobs";

json plain(const nlohmann::ordered_json& j) { return json::parse(j.dump()); }

[[noreturn]] void bad_body(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kInvalidArgument, "invalid request " + path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

template <typename T>
T field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) bad_body(path + "/" + key, "required");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_body(path + "/" + key, "wrong type");
  }
}

json model_json(const repo::ModelRecord& r) {
  json j = repo::to_json(r);
  try {
    j["shapes"] = plain(graph::shapes_to_json(graph::infer_shapes(r.graph)));
  } catch (const Error&) {
    j["shapes"] = nullptr;
  }
  return j;
}

}  // namespace

StorePaths::StorePaths(const fs::path& r)
    : root(r),
      blobs(r / "blobs"),
      datasets(r / "datasets"),
      history(r / "history.jsonl"),
      jobs(r / "jobs"),
      checkpoints(r / "checkpoints") {}

Service::Service(ApiConfig config) : config_(std::move(config)), paths_(config_.store_dir) {
  service::validate(config_);
  std::error_code ec;
  for (const auto& d : {paths_.root, paths_.blobs, paths_.datasets, paths_.jobs,
                        paths_.checkpoints, paths_.root / "models", paths_.root / "drafts"}) {
    fs::create_directories(d, ec);
    if (ec) {
      throw Error(ErrorCode::kStoreCorrupt, "cannot create " + d.string() + ": " + ec.message(),
                  {{"path", d.string()}});
    }
  }
  repository_ = std::make_unique<repo::Repository>(
      std::make_shared<repo::FileDocumentStore>(paths_.root),
      std::make_shared<repo::FileBlobStore>(paths_.blobs));
  features_ = std::make_unique<features::FeatureStore>(paths_.datasets);
  history_ = std::make_unique<genie::HistoryLog>(paths_.history);
  rules_ = config_.genie_rules_path ? genie::RuleTable::load(config_.genie_rules_path->string())
                                    : genie::RuleTable::defaults();
  surface_ = config_.surface_path ? genie::SurfaceConfig::load(config_.surface_path->string())
                                  : genie::SurfaceConfig::defaults();
  if (config_.seed_demo) {
    demo_models_ = seed_store(*repository_, *features_, *history_, surface_);
  } else {
    features::register_bundled(*features_);
  }

  trainer::JobHooks hooks;
  hooks.on_change = [this](const trainer::JobInfo& info) {
    json doc = plain(trainer::to_json(info));
    doc["kind"] = "train";
    repository_->documents().put(kJobs, info.job_id, doc);
  };
  hooks.on_complete = [this](const trainer::JobInfo& info, const trainer::TrainingRun& run) {
    return on_job_complete(info, run);
  };
  trainer::JobManagerOptions opt;
  opt.workers = config_.worker_count;
  opt.checkpoint_dir = paths_.checkpoints;
  opt.control_dir = paths_.jobs;
  jobs_ = std::make_unique<trainer::JobManager>(
      trainer::TrainingContext{repository_.get(), features_.get()}, opt, hooks);
}

Service::~Service() {
  jobs_.reset();
  for (auto& t : ticket_threads_) t.join();
}

repo::Task Service::task_for(const trainer::TrainConfig& c) const {
  if (!c.base_model_id.empty() && repository_->contains(c.base_model_id)) {
    return repository_->get(c.base_model_id).task;
  }
  return repo::Task::kTabularClassification;
}

std::optional<std::string> Service::on_job_complete(const trainer::JobInfo& info,
                                                    const trainer::TrainingRun& run) {
  const auto& c = run.config();
  const auto report = info.result ? *info.result : run.report();
  std::optional<repo::ModelRecord> base;
  if (!c.base_model_id.empty() && repository_->contains(c.base_model_id)) {
    base = repository_->get(c.base_model_id);
  }
  repo::PublishRequest pr;
  pr.name = (base ? base->name : std::string("model")) + "-" + std::string(trainer::to_string(c.tl_method)) +
            "-" + info.job_id.substr(info.job_id.size() - 8);
  pr.task = task_for(c);
  pr.graph = run.graph();
  for (auto& n : pr.graph.nodes) {
    n.frozen = false;
    n.reinit = false;
  }
  pr.author = "job:" + info.job_id;
  pr.metadata.pretrained_dataset = c.dataset_id;
  pr.metadata.accuracy = report.accuracy;
  if (run.boosting()) {
    // The published network is the strongest learner, not the ensemble.
    pr.metadata.accuracy = run.network().accuracy(features_->split(c.dataset_id, features::Split::kVal));
  }
  pr.metadata.latency_ms = report.inference_latency_ms;
  if (base) pr.metadata.parent_model_id = base->model_id;
  pr.metadata.evaluator = "real";
  const std::string id = repository_->publish(pr, repo::encode_tensors(run.network().to_tensors()));
  history_->append(genie::make_record(c, report, pr.task, now_ms(), "job"));
  return id;
}

// ---- models ---------------------------------------------------------------

json Service::publish(const json& body) {
  if (!body.is_object()) bad_body("/", "expected object");
  repo::PublishRequest pr;
  pr.name = field<std::string>(body, "name", "");
  pr.task = repo::task_from_string(field<std::string>(body, "task", ""));
  if (!body.contains("graph")) bad_body("/graph", "required");
  try {
    pr.graph = graph::graph_from_json(body["graph"], "/graph");
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidGraph, e.what(), {{"cause", e.to_json()}});
  }
  if (!body.contains("metadata")) {
    throw Error(ErrorCode::kMissingMetadata, "metadata is required", {{"field", "metadata"}});
  }
  pr.metadata = repo::metadata_from_json(body["metadata"]);
  pr.author = body.value("author", "");
  std::vector<std::uint8_t> weights;
  if (body.contains("weights_base64")) {
    weights = base64_decode(field<std::string>(body, "weights_base64", ""));
    repo::decode_tensors(weights);  // reject malformed blobs before storing
  } else if (body.contains("weights")) {
    repo::TensorBundle b;
    try {
      for (const auto& t : body["weights"].at("tensors")) {
        b.tensors.push_back({t.at("node_id"), t.at("name"), t.at("shape"), t.at("values")});
      }
      if (body["weights"].value("dtype", "float32") == "float64") b.dtype = repo::DType::kFloat64;
    } catch (const json::exception& e) {
      bad_body("/weights", e.what());
    }
    weights = repo::encode_tensors(b);
  } else {
    weights = repo::encode_tensors(repo::TensorBundle{});
  }
  const std::string id = repository_->publish(pr, weights);
  return model_json(repository_->get(id));
}

json Service::list_models(const json& query) {
  json out = json::array();
  for (const auto& r : repository_->retrieve(repo::query_from_json(query))) out.push_back(model_json(r));
  return out;
}

json Service::get_model(const std::string& id) {
  if (!repository_->contains(id)) {
    throw Error(ErrorCode::kUnknownModel, "unknown model '" + id + "'", {{"model_id", id}});
  }
  return model_json(repository_->get(id));
}

json Service::lineage(const std::string& id) {
  json out = json::array();
  for (const auto& r : repository_->lineage(id)) out.push_back(model_json(r));
  return out;
}

// ---- drafts ---------------------------------------------------------------

json Service::save_draft(const json& body) {
  if (!body.is_object()) bad_body("/", "expected object");
  const bool wrapped = body.contains("draft");
  const json& dj = wrapped ? body["draft"] : body;
  graph::Draft d = graph::draft_from_json(nlohmann::ordered_json::parse(dj.dump()));
  std::optional<std::string> id;
  if (wrapped && body.contains("draft_id") && !body["draft_id"].is_null()) {
    id = field<std::string>(body, "draft_id", "");
  }
  const std::string owner = wrapped ? body.value("owner", d.author) : d.author;
  return get_draft(repository_->save_draft(d, id, owner).draft_id);
}

json Service::get_draft(const std::string& id) {
  auto rec = repository_->load_draft(id);
  json j = repo::to_json(rec);
  try {
    j["shapes"] = plain(graph::shapes_to_json(graph::infer_shapes(rec.draft.graph)));
  } catch (const Error& e) {
    j["shapes"] = nullptr;
    j["shape_error"] = e.to_json();
  }
  return j;
}

// ---- validation and jobs --------------------------------------------------

trainer::TrainConfig Service::config_from_body(const json& body) const {
  if (!body.is_object()) bad_body("/", "expected object");
  const bool wrapped = body.contains("config") || body.contains("draft_id");
  if (!wrapped) return trainer::train_config_from_json(body);
  trainer::TrainConfig c;
  if (body.contains("draft_id")) {
    auto d = repository_->load_draft(field<std::string>(body, "draft_id", "")).draft;
    c.base_model_id = d.base_model_id;
    c.graph = d.graph;
    c = trainer::merge_partial(c, json::parse(d.pending_config.dump()));
  }
  if (body.contains("config")) c = trainer::merge_partial(c, body["config"]);
  if (c.dataset_id.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "invalid config /dataset_id: required",
                {{"path", "/dataset_id"}, {"reason", "required"}});
  }
  trainer::validate(c);
  return c;
}

json Service::validate(const json& body) {
  const auto c = config_from_body(body);
  double budget = config_.validate_budget_s;
  if (body.contains("config") || body.contains("draft_id")) {
    if (body.contains("budget_s")) budget = field<double>(body, "budget_s", "");
  }
  genie::SimulatedEvaluator sim(surface_, repository_.get(), features_.get());
  auto report = trainer::validate(
      {repository_.get(), features_.get()}, c, budget,
      [&](const trainer::TrainConfig& cfg, const graph::ModelGraph& g) { return sim.evaluate(cfg, g); });
  history_->append(genie::make_record(c, report, task_for(c), now_ms(), "validate"));
  return plain(trainer::to_json(report));
}

json Service::start_job(const json& body) {
  const auto c = config_from_body(body);
  const std::string id = jobs_->start(c);
  if (body.contains("device") && !body["device"].is_null()) {
    try {
      jobs_->to_device(id, trainer::device_from_string(field<std::string>(body, "device", "")));
    } catch (const Error&) {
      // Already dispatched; the placement request no longer applies.
    }
  }
  return get_job(id);
}

bool Service::adopt_job(const std::string& id) {
  try {
    jobs_->get(id);
    return true;
  } catch (const Error&) {
  }
  auto doc = repository_->documents().get(kJobs, id);
  if (!doc) return false;
  auto info = trainer::job_from_json(*doc);
  if (info.state != trainer::JobState::kPaused) return false;
  auto cp = trainer::load_checkpoint(paths_.checkpoints, id);
  if (!cp) return false;
  jobs_->adopt_paused(info, *cp);
  return true;
}

json Service::job_action(const std::string& id, const std::string& action, const json& body) {
  {
    std::lock_guard lock(ticket_mu_);
    if (auto it = tickets_.find(id); it != tickets_.end()) {
      throw Error(ErrorCode::kIllegalTransition, "genie tickets cannot be " + action + "d",
                  {{"from", it->second.state}, {"to", action}});
    }
  }
  if (!adopt_job(id)) {
    auto doc = repository_->documents().get(kJobs, id);
    if (!doc) throw Error(ErrorCode::kUnknownJob, "unknown job '" + id + "'", {{"job_id", id}});
    const auto state = trainer::job_state_from_string(doc->at("state").get<std::string>());
    // Owned by another process: forward through the control file.
    if ((action == "pause" || action == "terminate") &&
        (state == trainer::JobState::kRunning || state == trainer::JobState::kQueued)) {
      write_file_atomic(paths_.jobs / (id + ".control"), action);
      json out = *doc;
      out["requested"] = action;
      return out;
    }
    const std::string to = action == "pause" ? "Paused" : action == "resume" ? "Running"
                                                      : action == "terminate" ? "Terminated"
                                                                              : action;
    throw Error(ErrorCode::kIllegalTransition,
                "illegal transition " + std::string(trainer::to_string(state)) + " -> " + to,
                {{"from", trainer::to_string(state)}, {"to", to}});
  }
  if (action == "pause") {
    jobs_->pause(id);
  } else if (action == "resume") {
    jobs_->resume(id);
  } else if (action == "terminate") {
    jobs_->terminate(id);
  } else if (action == "to_device") {
    jobs_->to_device(id, trainer::device_from_string(field<std::string>(body, "device", "")));
  } else {
    bad_body("/action", "unknown action '" + action + "'");
  }
  return get_job(id);
}

json Service::get_job(const std::string& id) {
  {
    std::lock_guard lock(ticket_mu_);
    if (auto it = tickets_.find(id); it != tickets_.end()) {
      const Ticket& t = it->second;
      json j = {{"job_id", t.id}, {"kind", "genie"}, {"state", t.state},
                {"result", t.result ? *t.result : json()}, {"created_at", t.created_at}};
      if (t.state == "Failed") j["reason"] = t.reason;
      return j;
    }
  }
  try {
    json j = plain(trainer::to_json(jobs_->get(id)));
    j["kind"] = "train";
    return j;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownJob) throw;
  }
  if (auto doc = repository_->documents().get(kJobs, id)) return *doc;
  throw Error(ErrorCode::kUnknownJob, "unknown job '" + id + "'", {{"job_id", id}});
}

bool Service::wait_job(const std::string& id, double timeout_s) {
  {
    std::unique_lock lock(ticket_mu_);
    if (tickets_.count(id)) {
      lock.unlock();
      Stopwatch sw;
      while (sw.elapsed_s() < timeout_s) {
        {
          std::lock_guard l(ticket_mu_);
          const auto& s = tickets_.at(id).state;
          if (s == "Completed" || s == "Failed") return true;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      return false;
    }
  }
  return jobs_->wait(id, timeout_s);
}

// ---- datasets -------------------------------------------------------------

json Service::list_datasets() {
  json out = json::array();
  for (const auto& d : features_->list()) out.push_back(features::to_json(d));
  return out;
}

json Service::register_dataset(const json& body) {
  if (!body.is_object()) bad_body("/", "expected object");
  features::DatasetRecord rec;
  rec.dataset_id = body.value("dataset_id", "");
  rec.name = field<std::string>(body, "name", "");
  if (body.contains("similarity_tags")) {
    rec.similarity_tags = field<std::vector<std::string>>(body, "similarity_tags", "");
  }
  rec.num_classes = body.value("num_classes", 0);
  if (body.value("kind", "vector") == "image_like") rec.kind = features::DatasetKind::kImageLike;
  std::string id;
  if (body.contains("generator")) {
    id = features_->register_generated(rec, features::generator_from_json(body["generator"]));
  } else if (body.contains("csv_path")) {
    id = features_->register_csv(rec, field<std::string>(body, "csv_path", ""));
  } else if (body.contains("samples")) {
    const json& s = body["samples"];
    features::Batch b;
    try {
      const auto rows = s.at("features").get<std::vector<std::vector<double>>>();
      b.labels = s.at("labels").get<std::vector<int>>();
      b.n = rows.size();
      for (const auto& r : rows) b.features.insert(b.features.end(), r.begin(), r.end());
      b.feature_shape = s.value("feature_shape",
                                std::vector<std::int64_t>{rows.empty() ? 0 : std::int64_t(rows[0].size())});
      for (const auto& r : rows) {
        if (r.size() != rows.front().size()) {
          throw Error(ErrorCode::kShapeInconsistent, "rows have different lengths",
                      {{"path", "/samples/features"}});
        }
      }
    } catch (const json::exception& e) {
      bad_body("/samples", e.what());
    }
    if (rec.num_classes == 0 && !b.labels.empty()) {
      rec.num_classes = *std::max_element(b.labels.begin(), b.labels.end()) + 1;
    }
    rec.feature_shape = b.feature_shape;
    id = features_->register_dataset(rec, std::move(b), body.value("split_seed", std::uint64_t{0}));
  } else {
    bad_body("/", "one of generator, csv_path or samples is required");
  }
  return features::to_json(features_->get(id));
}

json Service::preview(const std::string& id, const json& body) {
  features::AugmentationSpec aug;
  if (body.contains("aug_preset")) {
    aug = features::augmentation_preset(field<std::string>(body, "aug_preset", ""));
  } else if (body.contains("aug")) {
    aug = features::augmentation_from_json(body["aug"]);
  }
  if (body.contains("seed")) aug.seed = field<std::uint64_t>(body, "seed", "");
  const std::size_t k = body.value("k", std::size_t{5});
  if (!features_->contains(id)) {
    throw Error(ErrorCode::kUnknownDataset, "unknown dataset '" + id + "'", {{"dataset_id", id}});
  }
  return features::to_json(features_->preview(id, aug, k));
}

// ---- genie ----------------------------------------------------------------

genie::GenieContext Service::genie_context() {
  genie::GenieContext ctx;
  ctx.repository = repository_.get();
  ctx.features = features_.get();
  ctx.history = history_.get();
  ctx.rules = rules_;
  ctx.surface = surface_;
  ctx.eval_mode = config_.genie_evaluator == "simulated" ? genie::EvalMode::kSimulated
                                                         : genie::EvalMode::kAuto;
  ctx.workers = config_.worker_count;
  ctx.trial_budget_s = config_.trial_budget_s;
  return ctx;
}

std::pair<json, bool> Service::genie(const json& body, bool wait) {
  const auto request = genie::request_from_json(body);
  auto ctx = genie_context();
  // Cheap sufficiency check so that history-only answers stay synchronous.
  const auto method = genie::recommend_tl_method(request, ctx.rules, *repository_, *features_);
  const auto hits = genie::search_history(request, method, history_->snapshot());
  const bool explores = static_cast<int>(hits.size()) < request.top_k;
  if (wait || !explores) {
    std::lock_guard lock(genie_mu_);
    return {plain(genie::to_json(genie::genie(ctx, request))), true};
  }
  // Fail fast on an empty candidate set before handing out a ticket.
  genie::propose_space(request, method, *repository_, *features_);
  Ticket t;
  t.id = random_id("genie");
  t.created_at = now_ms();
  {
    std::lock_guard lock(ticket_mu_);
    tickets_[t.id] = t;
    ticket_threads_.emplace_back([this, id = t.id, request, ctx]() mutable {
      {
        std::lock_guard l(ticket_mu_);
        tickets_[id].state = "Running";
      }
      try {
        std::lock_guard g(genie_mu_);
        json result = plain(genie::to_json(genie::genie(ctx, request)));
        std::lock_guard l(ticket_mu_);
        tickets_[id].result = std::move(result);
        tickets_[id].state = "Completed";
      } catch (const std::exception& e) {
        std::lock_guard l(ticket_mu_);
        tickets_[id].reason = e.what();
        tickets_[id].state = "Failed";
      }
    });
  }
  return {get_job(t.id), false};
}

// ---- state hash -----------------------------------------------------------

std::string Service::state_hash() const {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& e : fs::recursive_directory_iterator(paths_.root)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext == ".tmp" || ext == ".control") continue;
    entries.emplace_back(fs::relative(e.path(), paths_.root).generic_string(),
                         sha256_hex(read_file_bytes(e.path())));
  }
  std::sort(entries.begin(), entries.end());
  std::string acc;
  for (const auto& [p, h] : entries) acc += p + '\0' + h + '\n';
  return sha256_hex(acc);
}

}  // namespace modelps::service
