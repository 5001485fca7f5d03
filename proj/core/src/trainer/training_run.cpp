#include "modelps/trainer/training_run.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "modelps/error.h"
#include "modelps/trainer/losses.h"
#include "modelps/util.h"

namespace modelps::trainer {
namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kInvalidConfig, "invalid config " + path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

repo::ModelRecord base_record(const TrainingContext& ctx, const TrainConfig& c) {
  if (!ctx.repository || !ctx.repository->contains(c.base_model_id)) {
    invalid("/base_model_id", "unknown model '" + c.base_model_id + "'");
  }
  return ctx.repository->get(c.base_model_id);
}

features::DatasetRecord dataset_record(const TrainingContext& ctx, const std::string& id,
                                       const std::string& path) {
  if (!ctx.features || !ctx.features->contains(id)) {
    invalid(path, "unknown dataset '" + id + "'");
  }
  return ctx.features->get(id);
}

std::size_t flat(const std::vector<std::int64_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

features::Batch rows(const features::Batch& src, std::span<const std::size_t> idx) {
  features::Batch b;
  b.feature_shape = src.feature_shape;
  b.n = idx.size();
  const std::size_t d = src.feature_dim();
  b.features.reserve(idx.size() * d);
  for (auto i : idx) {
    auto r = src.row(i);
    b.features.insert(b.features.end(), r.begin(), r.end());
    b.labels.push_back(src.labels[i]);
  }
  return b;
}

// Source dataset for methods that need one: explicit, else the base model's
// pretraining set.
std::string source_id(const TrainingContext& ctx, const TrainConfig& c) {
  if (c.source_dataset_id) return *c.source_dataset_id;
  if (!c.base_model_id.empty() && ctx.repository && ctx.repository->contains(c.base_model_id)) {
    return ctx.repository->get(c.base_model_id).metadata.pretrained_dataset;
  }
  invalid("/source_dataset_id", "method needs a source dataset");
}

void put_network(repo::TensorBundle& b, const Network& net, const std::string& prefix) {
  for (const auto& d : net.dense()) {
    const auto out = static_cast<std::int64_t>(d.out), in = static_cast<std::int64_t>(d.in);
    b.tensors.push_back({prefix + d.node_id, "weight", {out, in}, d.weight});
    if (d.has_bias) b.tensors.push_back({prefix + d.node_id, "bias", {out}, d.bias});
  }
}

void get_network(const repo::TensorBundle& b, Network& net, const std::string& prefix) {
  for (auto& d : net.dense()) {
    const repo::Tensor* w = b.find(prefix + d.node_id, "weight");
    const repo::Tensor* bias = b.find(prefix + d.node_id, "bias");
    if (!w || w->values.size() != d.weight.size() ||
        (d.has_bias && (!bias || bias->values.size() != d.bias.size()))) {
      throw Error(ErrorCode::kStoreCorrupt, "checkpoint is missing layer " + prefix + d.node_id);
    }
    d.weight = w->values;
    if (d.has_bias) d.bias = bias->values;
  }
}

}  // namespace

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kPaused: return "paused";
    case RunStatus::kTerminated: return "terminated";
    case RunStatus::kBudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

graph::ModelGraph distill_student(const graph::ModelGraph& teacher) {
  graph::ModelGraph g = teacher;
  auto order = graph::topological_order(g);
  std::vector<graph::LayerNode*> dense;
  for (const auto& id : order) {
    auto* n = g.find(id);
    if (n->kind == graph::LayerKind::kDense) dense.push_back(n);
  }
  for (std::size_t i = 0; i + 1 < dense.size(); ++i) {
    const auto w = std::max<std::int64_t>(8, dense[i]->dim("out_features") / 2);
    dense[i]->attrs["out_features"] = static_cast<double>(w);
    dense[i + 1]->attrs["in_features"] = static_cast<double>(w);
  }
  for (auto& n : g.nodes) {
    n.frozen = false;
    n.reinit = false;
  }
  graph::validate(g);
  return g;
}

PreparedModel prepare_model(const TrainingContext& ctx, const TrainConfig& c) {
  std::optional<repo::ModelRecord> base;
  if (!c.base_model_id.empty()) base = base_record(ctx, c);
  const bool kd = c.tl_method == TlMethod::kKnowledgeDistill;
  PreparedModel pm;
  if (c.graph) {
    pm.graph = *c.graph;
  } else if (base) {
    pm.graph = kd ? distill_student(base->graph) : base->graph;
  } else {
    invalid("/base_model_id", "either a base model or a graph is required");
  }
  try {
    graph::validate(pm.graph);
  } catch (const Error& e) {
    invalid("/graph", e.what());
  }
  if (!graph::is_executable(pm.graph)) {
    throw Error(ErrorCode::kInvalidConfig, "graph contains layers the native trainer cannot run",
                {{"path", "/graph"}, {"reason", "not executable"}, {"executable", false}});
  }
  auto layers = graph::parameterized_layers(pm.graph);
  if (c.frozen_layers > static_cast<int>(layers.size())) {
    invalid("/frozen_layers", "K=" + std::to_string(c.frozen_layers) + " exceeds " +
                                  std::to_string(layers.size()) + " parameterized layers");
  }
  for (int i = 0; i < c.frozen_layers; ++i) pm.graph.find(layers[i])->frozen = true;

  auto ds = dataset_record(ctx, c.dataset_id, "/dataset_id");
  pm.net = Network::from_graph(pm.graph);
  if (pm.net.input_dim() != flat(ds.feature_shape)) {
    invalid("/dataset_id", "model expects " + std::to_string(pm.net.input_dim()) +
                               " input features, dataset has " +
                               std::to_string(flat(ds.feature_shape)));
  }
  if (pm.net.output_dim() != static_cast<std::size_t>(ds.num_classes)) {
    invalid("/dataset_id", "model outputs " + std::to_string(pm.net.output_dim()) +
                               " classes, dataset has " + std::to_string(ds.num_classes));
  }
  pm.net.init_all(mix_seed({c.seed, 0x1A17ULL}));
  const bool transfer = base && !kd && c.tl_method != TlMethod::kFromScratch;
  if (transfer) pm.transferred = pm.net.load(ctx.repository->fetch_tensors(base->model_id));
  return pm;
}

std::uint64_t dropout_seed(const TrainConfig& c, int epoch, std::size_t batch) {
  return mix_seed({c.seed, static_cast<std::uint64_t>(epoch), batch, 0xD20ULL});
}

std::vector<features::Batch> epoch_batches(const features::Batch& train, const TrainConfig& c,
                                           int num_classes, int epoch) {
  std::vector<std::size_t> perm(train.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed({c.seed, static_cast<std::uint64_t>(epoch), 0x5EEDULL}));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<features::Batch> out;
  const std::size_t bs = static_cast<std::size_t>(c.batch_size);
  for (std::size_t start = 0, b = 0; start < train.n; start += bs, ++b) {
    const std::size_t m = std::min(bs, train.n - start);
    auto batch = rows(train, std::span(perm).subspan(start, m));
    if (!c.aug.empty()) {
      batch = features::augment(batch, c.aug, num_classes,
                                mix_seed({c.seed, static_cast<std::uint64_t>(epoch), b}));
    }
    out.push_back(std::move(batch));
  }
  return out;
}

double train_step(Network& net, OptimizerState& state, const features::Batch& batch,
                  const TrainConfig& c, std::uint64_t seed) {
  auto cache = net.forward(batch.features, batch.n, true, seed);
  auto lg = cross_entropy(Network::logits(cache), batch.n, net.output_dim(), batch.labels);
  if (!std::isfinite(lg.loss)) throw Error(ErrorCode::kNonFiniteLoss, "loss is not finite");
  auto grads = net.backward(cache, lg.grad);
  sgd_update(net, state, grads, c.lr, c.momentum);
  return lg.loss;
}

TrainingRun::TrainingRun(TrainingContext ctx, TrainConfig config)
    : ctx_(ctx), config_(std::move(config)) {
  validate(config_);
  auto pm = prepare_model(ctx_, config_);
  graph_ = std::move(pm.graph);
  net_ = std::move(pm.net);
  transferred_ = std::move(pm.transferred);
  opt_ = net_.zero_state();
  dataset_ = ctx_.features->get(config_.dataset_id);
  train_ = ctx_.features->split(config_.dataset_id, features::Split::kTrain);
  val_ = ctx_.features->split(config_.dataset_id, features::Split::kVal);
  if (train_.n == 0) {
    throw Error(ErrorCode::kEmptySplit, "train split of '" + config_.dataset_id + "' is empty");
  }

  switch (config_.tl_method) {
    case TlMethod::kKnowledgeDistill: {
      auto base = base_record(ctx_, config_);
      if (!graph::is_executable(base.graph)) {
        invalid("/base_model_id", "teacher graph is not executable");
      }
      teacher_ = Network::from_graph(base.graph);
      teacher_->load(ctx_.repository->fetch_tensors(base.model_id));
      if (teacher_->output_dim() != net_.output_dim()) {
        invalid("/base_model_id", "teacher and student class counts differ");
      }
      break;
    }
    case TlMethod::kMmdAdapt:
    case TlMethod::kTradaboost: {
      const std::string sid = source_id(ctx_, config_);
      auto src = dataset_record(ctx_, sid, "/source_dataset_id");
      if (src.feature_shape != dataset_.feature_shape || src.num_classes != dataset_.num_classes) {
        throw Error(ErrorCode::kIncompatibleDatasets,
                    "datasets '" + sid + "' and '" + config_.dataset_id + "' differ in shape or labels",
                    {{"source", sid}, {"target", config_.dataset_id}});
      }
      source_ = ctx_.features->split(sid, features::Split::kTrain);
      if (config_.tl_method == TlMethod::kTradaboost) {
        boost_ = std::make_unique<Tradaboost>(source_, train_, dataset_.num_classes, net_, config_);
      }
      break;
    }
    default:
      break;
  }
}

int TrainingRun::total_epochs() const {
  return boost_ ? config_.boosting_rounds : config_.epochs;
}

double TrainingRun::estimate_epoch_s() const {
  if (last_epoch_s_) return *last_epoch_s_;
  // Time a forward/backward pass of one batch and scale by the epoch's batch
  // count.
  const std::size_t m = std::min<std::size_t>(train_.n, config_.batch_size);
  std::vector<double> x(train_.features.begin(), train_.features.begin() + m * train_.feature_dim());
  std::vector<int> y(train_.labels.begin(), train_.labels.begin() + m);
  double best = INFINITY;
  for (int r = 0; r < 3; ++r) {
    Stopwatch sw;
    auto cache = net_.forward(x, m, true, 0);
    auto lg = cross_entropy(Network::logits(cache), m, net_.output_dim(), y);
    auto g = net_.backward(cache, lg.grad);
    best = std::min(best, sw.elapsed_s());
  }
  const double bs = static_cast<double>(config_.batch_size);
  double batches = std::ceil(static_cast<double>(train_.n) / bs);
  double factor = 1.0;
  switch (config_.tl_method) {
    case TlMethod::kMmdAdapt: factor = 2.2; break;
    case TlMethod::kKnowledgeDistill: factor = 1.5; break;
    case TlMethod::kTradaboost:
      batches = config_.epochs * std::ceil(static_cast<double>(train_.n + source_.n) / bs);
      factor = 1.1;
      break;
    default: break;
  }
  return best * batches * factor;
}

bool TrainingRun::run_epoch(RunControl& control, const std::function<bool()>& over_budget,
                            double* loss) {
  auto abort = [&] { return control.terminate_requested() || over_budget(); };
  if (boost_) {
    auto outcome = boost_->step(abort);
    if (outcome == Tradaboost::StepOutcome::kAborted) return false;
    *loss = boost_->rounds().back().epsilon;
    return true;
  }
  const int nc = dataset_.num_classes;
  auto batches = epoch_batches(train_, config_, nc, epoch_);
  double total = 0.0;
  std::size_t seen = 0;

  std::vector<std::size_t> src_perm;
  if (config_.tl_method == TlMethod::kMmdAdapt) {
    src_perm.resize(source_.n);
    std::iota(src_perm.begin(), src_perm.end(), 0);
    std::mt19937_64 rng(
        mix_seed({config_.seed, static_cast<std::uint64_t>(epoch_), 0x50CULL}));
    std::shuffle(src_perm.begin(), src_perm.end(), rng);
  }

  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (abort()) return false;
    const auto& batch = batches[b];
    const std::uint64_t ds = dropout_seed(config_, epoch_, b);
    double l = 0.0;
    switch (config_.tl_method) {
      case TlMethod::kKnowledgeDistill: {
        auto tc = teacher_->forward(batch.features, batch.n);
        auto cache = net_.forward(batch.features, batch.n, true, ds);
        auto lg = kd_loss(Network::logits(cache), Network::logits(tc), batch.n, net_.output_dim(),
                          batch.labels, config_.kd_temperature, config_.kd_alpha);
        l = lg.loss;
        if (!std::isfinite(l)) throw Error(ErrorCode::kNonFiniteLoss, "loss is not finite");
        auto g = net_.backward(cache, lg.grad);
        sgd_update(net_, opt_, g, config_.lr, config_.momentum);
        break;
      }
      case TlMethod::kMmdAdapt: {
        std::vector<std::size_t> idx(batch.n);
        for (std::size_t k = 0; k < batch.n; ++k) {
          idx[k] = src_perm[(b * config_.batch_size + k) % source_.n];
        }
        auto sb = rows(source_, idx);
        auto ct = net_.forward(batch.features, batch.n, true, ds);
        auto cs = net_.forward(sb.features, sb.n, true, mix_seed({ds, 1}));
        const std::size_t c = net_.output_dim();
        auto lt = cross_entropy(Network::logits(ct), batch.n, c, batch.labels);
        auto ls = cross_entropy(Network::logits(cs), sb.n, c, sb.labels);
        const std::size_t h = net_.hidden_index();
        const std::size_t hd = ct.acts[h].size() / batch.n;
        Kernel k = config_.mmd_gamma > 0 ? Kernel::rbf(config_.mmd_gamma) : Kernel::linear();
        auto m = mmd(cs.acts[h], sb.n, hd, ct.acts[h], batch.n, hd, k, true);
        l = lt.loss + ls.loss + config_.mmd_weight * m.value;
        if (!std::isfinite(l)) throw Error(ErrorCode::kNonFiniteLoss, "loss is not finite");
        for (double& v : m.grad_a) v *= config_.mmd_weight;
        for (double& v : m.grad_b) v *= config_.mmd_weight;
        auto gt = net_.backward(ct, lt.grad, h, m.grad_b);
        auto gs = net_.backward(cs, ls.grad, h, m.grad_a);
        for (std::size_t i = 0; i < gt.weight.size(); ++i) {
          for (std::size_t k2 = 0; k2 < gt.weight[i].size(); ++k2) gt.weight[i][k2] += gs.weight[i][k2];
          for (std::size_t k2 = 0; k2 < gt.bias[i].size(); ++k2) gt.bias[i][k2] += gs.bias[i][k2];
        }
        sgd_update(net_, opt_, gt, config_.lr, config_.momentum);
        break;
      }
      default:
        l = train_step(net_, opt_, batch, config_, ds);
        break;
    }
    total += l * static_cast<double>(batch.n);
    seen += batch.n;
  }
  *loss = seen ? total / static_cast<double>(seen) : 0.0;
  return true;
}

RunStatus TrainingRun::run(RunControl& control, std::optional<double> budget_s) {
  Stopwatch sw;
  auto over = [&] { return budget_s && sw.elapsed_s() > *budget_s; };
  while (epoch_ < total_epochs() && !(boost_ && boost_->done())) {
    if (control.terminate_requested()) return RunStatus::kTerminated;
    if (control.pause_requested()) return RunStatus::kPaused;
    if (budget_s && sw.elapsed_s() + estimate_epoch_s() > *budget_s) {
      return RunStatus::kBudgetExhausted;
    }
    Snapshot snap{net_, opt_};
    std::optional<Tradaboost::State> boost_snap;
    if (boost_) boost_snap = boost_->state();
    Stopwatch es;
    double loss = 0.0;
    if (!run_epoch(control, over, &loss)) {
      net_ = std::move(snap.net);
      opt_ = std::move(snap.opt);
      if (boost_) boost_->set_state(std::move(*boost_snap));
      return control.terminate_requested() ? RunStatus::kTerminated : RunStatus::kBudgetExhausted;
    }
    last_epoch_s_ = es.elapsed_s();
    train_time_s_ += *last_epoch_s_;
    losses_.push_back(loss);
    ++epoch_;
    control.on_epoch(epoch_, loss);
  }
  return RunStatus::kCompleted;
}

const Network& TrainingRun::network() const {
  if (boost_ && !boost_->learners().empty()) {
    const auto& learners = boost_->learners();
    std::size_t li = 0, best = 0;
    double best_vote = -INFINITY;
    for (const auto& r : boost_->rounds()) {
      if (!r.accepted) continue;
      if (r.vote > best_vote) {
        best_vote = r.vote;
        best = li;
      }
      ++li;
    }
    return learners[best];
  }
  return net_;
}

double TrainingRun::evaluate(features::Split split) const {
  features::Batch data =
      split == features::Split::kVal ? val_ : ctx_.features->split(config_.dataset_id, split);
  if (data.n == 0) return 0.0;
  if (boost_ && !boost_->learners().empty()) return boost_->ensemble().accuracy(data);
  return net_.accuracy(data);
}

double TrainingRun::measure_latency_ms(int runs, int warmup) const {
  std::vector<double> x(net_.input_dim(), 0.0);
  if (val_.n > 0) x.assign(val_.row(0).begin(), val_.row(0).end());
  std::optional<Ensemble> ens;
  if (boost_ && !boost_->learners().empty()) ens = boost_->ensemble();
  auto once = [&] {
    volatile int sink = ens ? ens->predict(x, 1)[0] : net_.predict(x, 1)[0];
    (void)sink;
  };
  for (int i = 0; i < warmup; ++i) once();
  Stopwatch sw;
  for (int i = 0; i < runs; ++i) once();
  return sw.elapsed_s() * 1000.0 / runs;
}

ValidationReport TrainingRun::report() const {
  ValidationReport r;
  r.accuracy = evaluate(features::Split::kVal);
  r.train_time_s = train_time_s_;
  r.inference_latency_ms = measure_latency_ms();
  r.params = (boost_ && !boost_->learners().empty()) ? boost_->ensemble().param_count()
                                                     : graph::count_params(graph_);
  r.epochs_completed = epoch_;
  r.config = config_;
  r.evaluator = EvaluatorKind::kReal;
  return r;
}

Checkpoint TrainingRun::checkpoint() const {
  Checkpoint c;
  c.epoch = epoch_;
  c.train_time_s = train_time_s_;
  c.tensors.dtype = repo::DType::kFloat64;
  put_network(c.tensors, net_, "");
  for (std::size_t i = 0; i < opt_.weight.size(); ++i) {
    const auto& d = net_.dense()[i];
    c.tensors.tensors.push_back({d.node_id, "momentum_weight",
                                 {static_cast<std::int64_t>(opt_.weight[i].size())},
                                 opt_.weight[i]});
    c.tensors.tensors.push_back({d.node_id, "momentum_bias",
                                 {static_cast<std::int64_t>(opt_.bias[i].size())}, opt_.bias[i]});
  }
  c.extra["losses"] = losses_;
  if (last_epoch_s_) c.extra["last_epoch_s"] = *last_epoch_s_;
  if (boost_) {
    auto s = boost_->state();
    c.tensors.tensors.push_back({"boost", "source_weights",
                                 {static_cast<std::int64_t>(s.source_w.size())}, s.source_w});
    c.tensors.tensors.push_back({"boost", "target_weights",
                                 {static_cast<std::int64_t>(s.target_w.size())}, s.target_w});
    for (std::size_t i = 0; i < s.learners.size(); ++i) {
      put_network(c.tensors, s.learners[i], "learner" + std::to_string(i) + "/");
    }
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : s.rounds) {
      rounds.push_back({{"epsilon", r.epsilon},
                        {"beta_t", std::isfinite(r.beta_t) ? nlohmann::json(r.beta_t) : nlohmann::json()},
                        {"accepted", r.accepted},
                        {"source_errors", r.source_errors},
                        {"target_errors", r.target_errors},
                        {"vote", r.vote}});
    }
    c.extra["boost"] = {{"rounds", rounds}, {"learners", s.learners.size()}, {"done", s.done}};
  }
  return c;
}

void TrainingRun::restore(const Checkpoint& c) {
  get_network(c.tensors, net_, "");
  for (std::size_t i = 0; i < opt_.weight.size(); ++i) {
    const auto& id = net_.dense()[i].node_id;
    const repo::Tensor* mw = c.tensors.find(id, "momentum_weight");
    const repo::Tensor* mb = c.tensors.find(id, "momentum_bias");
    if (!mw || !mb || mw->values.size() != opt_.weight[i].size() ||
        mb->values.size() != opt_.bias[i].size()) {
      throw Error(ErrorCode::kStoreCorrupt, "checkpoint is missing optimizer state for " + id);
    }
    opt_.weight[i] = mw->values;
    opt_.bias[i] = mb->values;
  }
  epoch_ = c.epoch;
  train_time_s_ = c.train_time_s;
  losses_ = c.extra.value("losses", std::vector<double>{});
  if (c.extra.contains("last_epoch_s")) {
    last_epoch_s_ = c.extra["last_epoch_s"].get<double>();
  } else {
    last_epoch_s_.reset();
  }
  if (boost_) {
    const auto& bj = c.extra.at("boost");
    Tradaboost::State s;
    const repo::Tensor* sw = c.tensors.find("boost", "source_weights");
    const repo::Tensor* tw = c.tensors.find("boost", "target_weights");
    if (!sw || !tw) throw Error(ErrorCode::kStoreCorrupt, "checkpoint is missing boosting weights");
    s.source_w = sw->values;
    s.target_w = tw->values;
    for (const auto& r : bj.at("rounds")) {
      BoostRound br;
      br.epsilon = r.at("epsilon");
      br.beta_t = r.at("beta_t").is_null() ? INFINITY : r.at("beta_t").get<double>();
      br.accepted = r.at("accepted");
      br.source_errors = r.at("source_errors");
      br.target_errors = r.at("target_errors");
      br.vote = r.at("vote");
      s.rounds.push_back(br);
    }
    const std::size_t n = bj.at("learners");
    for (std::size_t i = 0; i < n; ++i) {
      Network l = net_;
      get_network(c.tensors, l, "learner" + std::to_string(i) + "/");
      s.learners.push_back(std::move(l));
    }
    s.done = bj.at("done");
    boost_->set_state(std::move(s));
  }
}

void save_checkpoint(const std::filesystem::path& dir, const std::string& job_id,
                     const Checkpoint& c) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / (job_id + ".bin"), encode_tensors(c.tensors));
  nlohmann::json side = {{"job_id", job_id},
                         {"epoch", c.epoch},
                         {"rng_state", {{"derivation", "mix_seed(seed, epoch, batch)"},
                                        {"next_epoch", c.epoch}}},
                         {"train_time_s", c.train_time_s},
                         {"extra", c.extra}};
  write_file_atomic(dir / (job_id + ".json"), side.dump(2));
}

std::optional<Checkpoint> load_checkpoint(const std::filesystem::path& dir,
                                          const std::string& job_id) {
  const auto bin = dir / (job_id + ".bin");
  const auto side = dir / (job_id + ".json");
  if (!std::filesystem::exists(bin) || !std::filesystem::exists(side)) return std::nullopt;
  Checkpoint c;
  c.tensors = repo::decode_tensors(read_file_bytes(bin));
  try {
    auto j = nlohmann::json::parse(read_file_text(side));
    c.epoch = j.at("epoch");
    c.train_time_s = j.value("train_time_s", 0.0);
    c.extra = j.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kStoreCorrupt, "bad checkpoint sidecar: " + std::string(e.what()),
                {{"path", side.string()}});
  }
  return c;
}

}  // namespace modelps::trainer
