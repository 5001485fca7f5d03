#include "modelps/genie/genie.h"

#include <algorithm>
#include <set>

#include "modelps/error.h"
#include "modelps/trainer/training_run.h"
#include "modelps/trainer/validator.h"
#include "modelps/util.h"

namespace modelps::genie {
namespace {

constexpr std::size_t kMaxBaseModels = 5;

std::size_t flat(const std::vector<std::int64_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

// Candidates must take the dataset's features; executable ones must also
// emit its classes.
bool fits(const graph::ModelGraph& g, const features::DatasetRecord& ds) {
  if (flat(g.input_shape) != flat(ds.feature_shape)) return false;
  if (!graph::is_executable(g)) return true;
  try {
    return trainer::Network::from_graph(g).output_dim() == static_cast<std::size_t>(ds.num_classes);
  } catch (const Error&) {
    return false;
  }
}

int k_max_for(const graph::ModelGraph& g, trainer::TlMethod method) {
  const graph::ModelGraph& used =
      method == trainer::TlMethod::kKnowledgeDistill ? trainer::distill_student(g) : g;
  return static_cast<int>(graph::parameterized_layers(used).size());
}

std::unique_ptr<Evaluator> make_evaluator(const GenieContext& ctx) {
  SimulatedEvaluator sim(ctx.surface, ctx.repository, ctx.features);
  if (ctx.eval_mode == EvalMode::kSimulated) return std::make_unique<SurfaceEvaluator>(sim);
  return std::make_unique<TrainerEvaluator>(trainer::TrainingContext{ctx.repository, ctx.features},
                                            sim, ctx.trial_budget_s);
}

// First stage of the distillation pipeline: distill the strongest candidate
// on its public pretraining data and publish the student.
std::string distill_stage(GenieContext& ctx, const GenieRequest& q, const SearchSpace& space) {
  const auto teacher = ctx.repository->get(space.base_models.front());
  trainer::TrainConfig c;
  c.tl_method = trainer::TlMethod::kKnowledgeDistill;
  c.base_model_id = teacher.model_id;
  c.dataset_id = teacher.metadata.pretrained_dataset;
  c.epochs = 10;
  c.seed = mix_seed({q.seed, 0x4BDULL});
  trainer::TrainingContext tctx{ctx.repository, ctx.features};

  const bool real = ctx.eval_mode == EvalMode::kAuto && graph::is_executable(teacher.graph) &&
                    ctx.features->contains(c.dataset_id);
  trainer::ValidationReport report;
  graph::ModelGraph student_graph;
  repo::TensorBundle weights;
  if (real) {
    trainer::TrainingRun run(tctx, c);
    trainer::RunControl control;
    run.run(control, ctx.trial_budget_s);
    report = run.report();
    student_graph = run.graph();
    weights = run.network().to_tensors();
  } else {
    if (!ctx.features->contains(c.dataset_id)) c.dataset_id = q.dataset_id;
    SimulatedEvaluator sim(ctx.surface, ctx.repository, ctx.features);
    report = sim.evaluate(c);
    student_graph = trainer::distill_student(teacher.graph);
  }
  for (auto& n : student_graph.nodes) n.frozen = false;
  if (ctx.history) {
    ctx.history->append(make_record(c, report, q.task, now_ms(), "kd_stage",
                                    trainer::TlMethod::kKnowledgeDistill));
  }
  repo::PublishRequest pr;
  pr.name = teacher.name + "-kd-student";
  pr.task = teacher.task;
  pr.graph = student_graph;
  pr.author = ctx.author;
  pr.metadata.pretrained_dataset = c.dataset_id;
  pr.metadata.accuracy = report.accuracy;
  pr.metadata.latency_ms = report.inference_latency_ms;
  pr.metadata.parent_model_id = teacher.model_id;
  pr.metadata.evaluator = real ? "real" : "simulated";
  return ctx.repository->publish(pr, repo::encode_tensors(weights));
}

}  // namespace

SearchSpace propose_space(const GenieRequest& q, trainer::TlMethod method,
                          const repo::Repository& repository,
                          const features::FeatureStore& features) {
  if (!features.contains(q.dataset_id)) {
    throw Error(ErrorCode::kUnknownDataset, "unknown dataset '" + q.dataset_id + "'",
                {{"dataset_id", q.dataset_id}});
  }
  const auto target = features.get(q.dataset_id);
  repo::Query mq;
  mq.task = q.task;
  mq.sort = repo::SortKey::kAccuracy;
  mq.descending = true;
  SearchSpace s;
  s.tl_method = method;
  for (const auto& m : repository.retrieve(mq)) {
    if (s.base_models.size() == kMaxBaseModels) break;
    if (!fits(m.graph, target)) continue;
    s.base_models.push_back(m.model_id);
    s.k_max[m.model_id] = k_max_for(m.graph, method);
  }
  if (s.base_models.empty()) {
    throw Error(ErrorCode::kNoCandidateModels,
                "no published " + std::string(repo::to_string(q.task)) + " model fits dataset '" +
                    q.dataset_id + "'",
                {{"task", repo::to_string(q.task)}, {"dataset_id", q.dataset_id}});
  }
  s.datasets.push_back(target.dataset_id);
  std::vector<std::pair<double, std::string>> related;
  for (const auto& d : features.list()) {
    if (d.dataset_id == target.dataset_id || d.feature_shape != target.feature_shape ||
        d.num_classes != target.num_classes) {
      continue;
    }
    const double o = features::tag_overlap(d.similarity_tags, target.similarity_tags);
    if (o > 0.0) related.emplace_back(-o, d.dataset_id);
  }
  std::sort(related.begin(), related.end());
  for (const auto& [_, id] : related) s.datasets.push_back(id);
  const auto presets = features::augmentation_presets();
  s.aug_presets.assign(presets.begin(), presets.end());
  return s;
}

nlohmann::ordered_json to_json(const Recommendation& r) {
  nlohmann::ordered_json j;
  j["tl_method"] = trainer::to_string(r.tl_method);
  j["history_hits"] = r.history_hits;
  j["explored"] = r.explored;
  j["trials"] = r.trials;
  j["rung_sizes"] = r.rung_sizes;
  j["student_model_id"] =
      r.student_model_id ? nlohmann::ordered_json(*r.student_model_id) : nlohmann::ordered_json();
  j["stages"] = r.stages;
  j["results"] = nlohmann::ordered_json::array();
  for (const auto& e : r.entries) {
    j["results"].push_back({{"config", trainer::to_json(e.config)},
                            {"report", trainer::to_json(e.report)},
                            {"provenance", e.provenance},
                            {"timestamp", e.timestamp}});
  }
  return j;
}

Recommendation genie(GenieContext& ctx, const GenieRequest& q) {
  validate(q);
  Recommendation out;
  out.tl_method = recommend_tl_method(q, ctx.rules, *ctx.repository, *ctx.features);
  const auto history = ctx.history ? ctx.history->snapshot() : std::vector<HistoryRecord>{};
  auto hits = search_history(q, out.tl_method, history);
  out.history_hits = hits.size();
  out.stages.push_back("search_history");

  std::vector<std::pair<HistoryRecord, std::string>> pool;
  for (auto& h : hits) pool.emplace_back(h, "history");

  const int threshold = ctx.insufficient_threshold.value_or(q.top_k);
  if (static_cast<int>(hits.size()) < threshold) {
    out.explored = true;
    auto space = propose_space(q, out.tl_method, *ctx.repository, *ctx.features);
    ExploreOptions opt;
    opt.workers = ctx.workers;
    opt.history = ctx.history;
    opt.task = q.task;
    opt.record_method = out.tl_method;
    if (out.tl_method == trainer::TlMethod::kKnowledgeDistill) {
      const std::string student = distill_stage(ctx, q, space);
      out.student_model_id = student;
      out.stages.push_back("knowledge_distill");
      const auto rec = ctx.repository->get(student);
      space.base_models = {student};
      space.k_max = {{student, k_max_for(rec.graph, trainer::TlMethod::kFineTune)}};
      space.datasets = {q.dataset_id};
      space.tl_method = trainer::TlMethod::kFineTune;
      opt.record_source = "explore_edge";
      out.stages.push_back("fine_tune");
    } else {
      out.stages.push_back("explore");
    }
    auto evaluator = make_evaluator(ctx);
    auto er = explore(q, space, *evaluator, q.explore_budget, opt);
    out.trials = er.trials.size();
    out.rung_sizes = er.rung_sizes;
    for (auto& r : er.records) pool.emplace_back(std::move(r), "explored");
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (selects(q, out.tl_method, pool[i].first)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(q.targets, pool[a].first, pool[b].first);
  });
  std::set<std::string> seen;
  for (auto i : order) {
    if (static_cast<int>(out.entries.size()) == q.top_k) break;
    const auto& [rec, prov] = pool[i];
    if (!seen.insert(rec.config_hash).second) continue;
    out.entries.push_back({rec.config, rec.report, prov, rec.timestamp});
  }
  return out;
}

}  // namespace modelps::genie
