#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "modelps/error.h"
#include "modelps/features/feature_store.h"
#include "modelps/trainer/losses.h"
#include "modelps/trainer/network.h"
#include "modelps/trainer/tradaboost.h"
#include "modelps/trainer/training_run.h"
#include "modelps/trainer/validator.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace modelps::trainer {
namespace {

using testing::mlp;

struct Problem {
  Network net;
  std::vector<double> x;
  std::vector<int> y;
  std::size_t n;
};

Problem random_problem(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int in = pick(1, 6), classes = pick(2, 5);
  std::vector<std::int64_t> hidden;
  for (int i = pick(1, 2); i > 0; --i) hidden.push_back(pick(2, 7));
  Problem p{Network::from_graph(mlp(in, hidden, classes)), {}, {}, std::size_t(pick(1, 6))};
  p.net.init_all(rng());
  std::normal_distribution<double> g(0, 1);
  for (auto& L : p.net.dense()) {
    for (auto& b : L.bias) b = 0.3 * g(rng);
  }
  for (std::size_t i = 0; i < p.n * std::size_t(in); ++i) p.x.push_back(g(rng));
  for (std::size_t i = 0; i < p.n; ++i) p.y.push_back(pick(0, classes - 1));
  return p;
}

TEST(Gradients, MatchCentralDifferencesOnRandomNets) {
  std::mt19937_64 rng(314);
  const double eps = 1e-4;
  for (int trial = 0; trial < 50; ++trial) {
    Problem p = random_problem(rng);
    auto cache = p.net.forward(p.x, p.n);
    auto lg = cross_entropy(Network::logits(cache), p.n, p.net.output_dim(), p.y);
    EXPECT_NEAR(lg.loss, oracle::mlp_loss(p.net, p.x, p.n, p.y), 1e-12);
    const Gradients g = p.net.backward(cache, lg.grad);
    double diff2 = 0, a2 = 0, n2 = 0;
    for (std::size_t l = 0; l < p.net.dense().size(); ++l) {
      auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t k = 0; k < params.size(); ++k) {
          const double keep = params[k];
          params[k] = keep + eps;
          const double up = oracle::mlp_loss(p.net, p.x, p.n, p.y);
          params[k] = keep - eps;
          const double down = oracle::mlp_loss(p.net, p.x, p.n, p.y);
          params[k] = keep;
          const double numeric = (up - down) / (2 * eps);
          diff2 += (numeric - analytic[k]) * (numeric - analytic[k]);
          a2 += analytic[k] * analytic[k];
          n2 += numeric * numeric;
        }
      };
      probe(p.net.dense()[l].weight, g.weight[l]);
      probe(p.net.dense()[l].bias, g.bias[l]);
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-12);
    EXPECT_LT(rel, 1e-4) << "trial " << trial;
  }
}

TEST(KdLoss, AlphaOneIsCrossEntropy) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4, c = 3;
    std::vector<double> s(n * c), te(n * c);
    for (auto& v : s) v = g(rng);
    for (auto& v : te) v = g(rng);
    std::vector<int> y = {0, 1, 2, 1};
    const auto kd = kd_loss(s, te, n, c, y, 1.0 + t * 0.5, 1.0);
    const auto ce = cross_entropy(s, n, c, y);
    EXPECT_NEAR(kd.loss, ce.loss, 1e-9);
    for (std::size_t i = 0; i < kd.grad.size(); ++i) EXPECT_NEAR(kd.grad[i], ce.grad[i], 1e-9);
  }
}

TEST(KdLoss, IdenticalLogitsHaveNoKlTerm) {
  std::vector<double> z = {0.3, -1.2, 2.0, 0.1, 0.0, -0.5};
  std::vector<int> y = {2, 0};
  for (double T : {0.5, 1.0, 4.0, 10.0}) {
    const double ce = cross_entropy(z, 2, 3, y).loss;
    const double kd = kd_loss(z, z, 2, 3, y, T, 0.0).loss;
    EXPECT_LT(std::abs(kd), 1e-9);
    EXPECT_NEAR(kd_loss(z, z, 2, 3, y, T, 0.5).loss, 0.5 * ce, 1e-9);
  }
}

TEST(KdLoss, HandComputedScalar) {
  // s=[1,0], t=[0,1], y=0, T=1, alpha=0.5:
  // CE = log(1+e^-1); KL = sum p_t log(p_t/p_s) with p_s=softmax([1,0]).
  const double e = std::exp(1.0);
  const double ps0 = e / (e + 1), ps1 = 1 / (e + 1);
  const double pt0 = 1 / (1 + e), pt1 = e / (1 + e);
  const double ce = -std::log(ps0);
  const double kl = pt0 * std::log(pt0 / ps0) + pt1 * std::log(pt1 / ps1);
  const double want = 0.5 * ce + 0.5 * kl;
  std::vector<double> s = {1, 0}, t = {0, 1};
  std::vector<int> y = {0};
  EXPECT_NEAR(kd_loss(s, t, 1, 2, y, 1.0, 0.5).loss, want, 1e-12);
  EXPECT_NEAR(oracle::kd_scalar(s, t, 0, 1.0, 0.5), want, 1e-12);
  EXPECT_NEAR(kd_loss(s, t, 1, 2, y, 3.0, 0.25).loss, oracle::kd_scalar(s, t, 0, 3.0, 0.25),
              1e-12);
}

TEST(KdLoss, GradientMatchesFiniteDifference) {
  std::vector<double> s = {0.2, -0.7, 1.1}, t = {1.0, 0.5, -0.3};
  std::vector<int> y = {1};
  const auto kd = kd_loss(s, t, 1, 3, y, 2.5, 0.3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto up = s, down = s;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double num = (oracle::kd_scalar(up, t, 1, 2.5, 0.3) -
                        oracle::kd_scalar(down, t, 1, 2.5, 0.3)) / 2e-6;
    EXPECT_NEAR(kd.grad[i], num, 1e-6);
  }
}

TEST(Mmd, IdentitySymmetryAndHandExpansion) {
  std::vector<std::vector<double>> a = {{0, 1}, {2, 3}, {4, -1}};
  std::vector<std::vector<double>> b = {{1, 1}, {0, 0}, {-1, 2}};
  auto flat = [](const auto& rows) {
    std::vector<double> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
  };
  const auto fa = flat(a), fb = flat(b);
  for (Kernel k : {Kernel::linear(), Kernel::rbf(0.5)}) {
    EXPECT_LT(mmd(fa, 3, 2, fa, 3, 2, k).value, 1e-9);
    EXPECT_DOUBLE_EQ(mmd(fa, 3, 2, fb, 3, 2, k).value, mmd(fb, 3, 2, fa, 3, 2, k).value);
  }
  // mean(a) = (2, 1), mean(b) = (0, 1): squared distance 4.
  EXPECT_NEAR(mmd(fa, 3, 2, fb, 3, 2, Kernel::linear()).value, 4.0, 1e-12);
  EXPECT_NEAR(oracle::mmd_linear(a, b), 4.0, 1e-12);
  EXPECT_NEAR(mmd(fa, 3, 2, fb, 3, 2, Kernel::rbf(0.5)).value, oracle::mmd_rbf(a, b, 0.5), 1e-12);
  EXPECT_THROW(mmd(fa, 3, 2, fb, 2, 3, Kernel::linear()), Error);
}

TEST(Mmd, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> a(4 * 3), b(5 * 3);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = g(rng) + 0.5;
  for (Kernel k : {Kernel::linear(), Kernel::rbf(0.3)}) {
    const auto r = mmd(a, 4, 3, b, 5, 3, k, true);
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto up = a, down = a;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double num =
          (mmd(up, 4, 3, b, 5, 3, k).value - mmd(down, 4, 3, b, 5, 3, k).value) / 2e-6;
      EXPECT_NEAR(r.grad_a[i], num, 1e-6);
    }
  }
}

features::Batch batch_of(const features::FeatureStore& fs, const std::string& id,
                         features::Split s = features::Split::kTrain) {
  return fs.split(id, s);
}

TEST(TrainStep, ZeroLearningRateAndFrozenLayers) {
  testing::World w;
  auto net = Network::from_graph(mlp(16, {16}, 2));
  net.init_all(3);
  TrainConfig c;
  c.lr = 0.0;
  auto state = net.zero_state();
  auto b = batch_of(w.features, "blobs-source");
  const Network before = net;
  train_step(net, state, b, c);
  EXPECT_EQ(net, before);

  c.lr = 0.1;
  net.dense()[0].frozen = true;
  for (int i = 0; i < 5; ++i) train_step(net, state, b, c);
  EXPECT_EQ(net.dense()[0].weight, before.dense()[0].weight);
  EXPECT_EQ(net.dense()[0].bias, before.dense()[0].bias);
  EXPECT_NE(net.dense()[1].weight, before.dense()[1].weight);
}

TEST(TrainStep, NonFiniteLossIsReported) {
  testing::World w;
  auto net = Network::from_graph(mlp(16, {8}, 2));
  net.init_all(1);
  net.dense()[0].weight[0] = std::numeric_limits<double>::infinity();
  auto state = net.zero_state();
  TrainConfig c;
  try {
    train_step(net, state, batch_of(w.features, "blobs-source"), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
  }
}

TEST(Network, LoadSkipsReinitAndMismatchedShapes) {
  auto g = mlp(16, {8}, 2);
  auto a = Network::from_graph(g);
  a.init_all(1);
  const auto tensors = a.to_tensors(repo::DType::kFloat64);
  auto g2 = g;
  g2.find("head")->reinit = true;
  auto b = Network::from_graph(g2);
  b.init_all(2);
  const auto loaded = b.load(tensors);
  EXPECT_EQ(loaded, (std::vector<std::string>{"fc1"}));
  EXPECT_EQ(b.dense()[0].weight, a.dense()[0].weight);
  EXPECT_NE(b.dense()[1].weight, a.dense()[1].weight);
}

TEST(Validate, LargeBudgetCompletesAndTinyBudgetStopsAtZero) {
  testing::World w;
  const auto base = testing::publish_pretrained(w, mlp(16, {32}, 2), "pre", "blobs-source");
  TrainConfig c;
  c.base_model_id = base;
  c.dataset_id = "blobs-target";
  c.epochs = 4;
  c.lr = 0.02;
  auto big = validate(w.ctx(), c, 30.0);
  EXPECT_EQ(big.epochs_completed, 4);
  EXPECT_EQ(big.evaluator, EvaluatorKind::kReal);

  TrainConfig slow = c;
  slow.epochs = 100000;
  auto tiny = validate(w.ctx(), slow, 1e-6);
  EXPECT_EQ(tiny.epochs_completed, 0);
  auto net = Network::from_graph(mlp(16, {32}, 2));
  net.init_all(mix_seed({c.seed, 0x1A17}));
  net.load(w.repository->fetch_tensors(base));
  EXPECT_DOUBLE_EQ(tiny.accuracy, net.accuracy(batch_of(w.features, "blobs-target",
                                                        features::Split::kVal)));
  EXPECT_THROW(validate(w.ctx(), c, 0.0), Error);
}

TEST(Validate, FineTuneFromPretrainedReachesHighAccuracy) {
  testing::World w;
  const auto base = testing::publish_pretrained(w, mlp(16, {32}, 2), "pre", "blobs-source");
  TrainConfig c;
  c.base_model_id = base;
  c.dataset_id = "blobs-target";
  c.frozen_layers = 0;
  c.epochs = 10;
  c.lr = 0.02;
  EXPECT_GE(validate(w.ctx(), c, 10.0).accuracy, 0.95);
}

TEST(Validate, InvalidConfigsAreRejected) {
  testing::World w;
  const auto base = testing::publish_untrained(*w.repository, mlp(16, {8}, 2), "m", "blobs-source");
  TrainConfig c;
  c.base_model_id = base;
  c.dataset_id = "blobs-3c";  // 3 classes vs a 2-way head
  EXPECT_THROW(validate(w.ctx(), c, 1.0), Error);
  c.dataset_id = "blobs-target";
  c.frozen_layers = 5;
  try {
    validate(w.ctx(), c, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"lr", "fast"}}), Error);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"unknown", 1}}), Error);
}

TEST(Validate, NonExecutableGraphUsesFallback) {
  testing::World w;
  graph::ModelGraph g;
  g.input_shape = {1, 4, 4};
  testing::append(g, {"c", "c", graph::LayerKind::kConv2d,
                      {{"in_channels", 1}, {"out_channels", 1}, {"kernel", 1}, {"stride", 1},
                       {"padding", 0}}});
  testing::append(g, {"f", "f", graph::LayerKind::kFlatten, {}});
  testing::append(g, testing::dense("head", 16, 2));
  const auto base = testing::publish_untrained(*w.repository, g, "conv", "blobs-source");
  TrainConfig c;
  c.base_model_id = base;
  c.dataset_id = "blobs-target";
  EXPECT_THROW(validate(w.ctx(), c, 1.0), Error);
  bool called = false;
  auto r = validate(w.ctx(), c, 1.0, [&](const TrainConfig& cfg, const graph::ModelGraph&) {
    called = true;
    ValidationReport rep;
    rep.config = cfg;
    rep.evaluator = EvaluatorKind::kSimulated;
    return rep;
  });
  EXPECT_TRUE(called);
  EXPECT_EQ(r.evaluator, EvaluatorKind::kSimulated);
}

TEST(Distill, StudentHalvesHiddenWidths) {
  auto s = distill_student(mlp(32, {128, 64, 12}, 4));
  EXPECT_EQ(s.find("fc1")->dim("out_features"), 64);
  EXPECT_EQ(s.find("fc2")->dim("in_features"), 64);
  EXPECT_EQ(s.find("fc2")->dim("out_features"), 32);
  EXPECT_EQ(s.find("fc3")->dim("out_features"), 8);
  EXPECT_EQ(s.find("head")->dim("in_features"), 8);
  EXPECT_EQ(s.find("head")->dim("out_features"), 4);
  EXPECT_NO_THROW(graph::validate(s));
}

TEST(Distill, KnowledgeDistillRunTrainsStudent) {
  testing::World w;
  const auto teacher = testing::publish_pretrained(w, mlp(16, {64, 64}, 2), "t", "blobs-source");
  TrainConfig c;
  c.tl_method = TlMethod::kKnowledgeDistill;
  c.base_model_id = teacher;
  c.dataset_id = "blobs-target";
  c.epochs = 5;
  c.lr = 0.02;
  TrainingRun run(w.ctx(), c);
  EXPECT_EQ(run.run(), RunStatus::kCompleted);
  EXPECT_LT(run.report().params, graph::count_params(w.repository->get(teacher).graph));
  EXPECT_GE(run.report().accuracy, 0.9);
}

TEST(MmdAdapt, RunsAndUsesSource) {
  testing::World w;
  const auto base = testing::publish_pretrained(w, mlp(32, {32}, 4), "txt", "text-public");
  TrainConfig c;
  c.tl_method = TlMethod::kMmdAdapt;
  c.base_model_id = base;
  c.dataset_id = "text-private";
  c.epochs = 3;
  c.lr = 0.02;
  c.mmd_weight = 0.5;
  TrainingRun run(w.ctx(), c);
  EXPECT_EQ(run.run(), RunStatus::kCompleted);
  EXPECT_EQ(run.epoch_losses().size(), 3u);
  c.source_dataset_id = "blobs-source";
  try {
    TrainingRun bad(w.ctx(), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompatibleDatasets);
  }
}

// ---- tradaboost -----------------------------------------------------------

features::Batch take(const features::Batch& b, std::size_t from, std::size_t n) {
  features::Batch out;
  out.feature_shape = b.feature_shape;
  out.n = n;
  const std::size_t d = b.dim();
  out.features.assign(b.features.begin() + from * d, b.features.begin() + (from + n) * d);
  out.labels.assign(b.labels.begin() + from, b.labels.begin() + from + n);
  return out;
}

TEST(Tradaboost, ZeroTargetErrorStopsEarly) {
  testing::World w;
  auto init = Network::from_graph(mlp(16, {8}, 2));
  init.init_all(4);
  TrainConfig c;
  c.epochs = 5;
  c.lr = 0.05;
  c.boosting_rounds = 10;
  Tradaboost tb(batch_of(w.features, "blobs-source"), batch_of(w.features, "blobs-target"), 2,
                init, c);
  while (tb.step() == Tradaboost::StepOutcome::kContinue) {
  }
  ASSERT_TRUE(tb.done());
  ASSERT_EQ(tb.rounds_done(), 1);
  EXPECT_EQ(tb.rounds()[0].target_errors, 0);
  EXPECT_TRUE(tb.rounds()[0].accepted);
  EXPECT_EQ(tb.ensemble().learners.size(), 1u);
}

TEST(Tradaboost, SourceWeightsShrinkOnlyOnMistakes) {
  auto src = features::generate({"gaussian_blobs",
                                 {{"k", 2}, {"d", 4}, {"n", 300}, {"separation", 0.4}, {"center_seed", 1}},
                                 1});
  auto tgt = features::generate({"shifted_blobs",
                                 {{"k", 2}, {"d", 4}, {"n", 60}, {"separation", 0.4}, {"center_seed", 1},
                                  {"shift", 2.0}},
                                 2});
  auto init = Network::from_graph(mlp(4, {4}, 2));
  init.init_all(9);
  TrainConfig c;
  c.epochs = 2;
  c.lr = 0.05;
  c.boosting_rounds = 6;
  Tradaboost tb(src.samples, tgt.samples, 2, init, c);
  EXPECT_LT(tb.beta(), 1.0);
  std::vector<double> prev = tb.source_weights();
  while (!tb.done()) {
    tb.step();
    const auto& now = tb.source_weights();
    int shrunk = 0;
    for (std::size_t i = 0; i < now.size(); ++i) {
      const bool same = now[i] == prev[i];
      const bool scaled = std::abs(now[i] - prev[i] * tb.beta()) <= 1e-15 * prev[i];
      EXPECT_TRUE(same || scaled) << i;
      shrunk += !same;
      EXPECT_LE(now[i], prev[i]);
    }
    if (tb.rounds().back().beta_t > 0 && !tb.done()) {
      EXPECT_EQ(shrunk, tb.rounds().back().source_errors);
    }
    prev = now;
  }
}

struct BenchmarkMeans {
  double boost = 0;
  double target_only = 0;
};

// 500 source / 50 target training samples, target shifted by 2 sigma, mean
// target-test accuracy over 20 seeds.
BenchmarkMeans shifted_blobs_benchmark(std::optional<double> separation, int d) {
  BenchmarkMeans m;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    nlohmann::json p = {{"k", 2}, {"d", d}, {"center_seed", 100 + s}};
    if (separation) p["separation"] = *separation;
    auto sp = p;
    sp["n"] = 500;
    auto tp = p;
    tp["n"] = 550;
    tp["shift"] = 2.0;
    const auto src = features::generate({"gaussian_blobs", sp, std::uint64_t(s)}).samples;
    const auto tgt_all = features::generate({"shifted_blobs", tp, std::uint64_t(1000 + s)}).samples;
    const auto tgt_train = take(tgt_all, 0, 50);
    const auto tgt_test = take(tgt_all, 50, 500);

    auto init = Network::from_graph(mlp(d, {16}, 2));
    init.init_all(std::uint64_t(s));
    TrainConfig c;
    c.epochs = 10;
    c.lr = 0.05;
    c.batch_size = 32;
    c.boosting_rounds = 10;
    c.seed = std::uint64_t(s);

    Tradaboost tb(src, tgt_train, 2, init, c);
    while (tb.step() == Tradaboost::StepOutcome::kContinue) {
    }
    m.boost += tb.ensemble().accuracy(tgt_test) / seeds;

    // Target-only baseline: same network, optimizer and epochs.
    Network net = init;
    auto state = net.zero_state();
    for (int e = 0; e < c.epochs; ++e) {
      auto batches = epoch_batches(tgt_train, c, 2, e);
      for (std::size_t b = 0; b < batches.size(); ++b) {
        train_step(net, state, batches[b], c, dropout_seed(c, e, b));
      }
    }
    m.target_only += net.accuracy(tgt_test) / seeds;
  }
  return m;
}

TEST(Tradaboost, ShiftedBlobsAtLeastTargetOnly) {
  const auto m = shifted_blobs_benchmark(std::nullopt, 16);
  RecordProperty("tradaboost_mean", std::to_string(m.boost));
  RecordProperty("target_only_mean", std::to_string(m.target_only));
  std::cout << "tradaboost " << m.boost << " target-only " << m.target_only << "\n";
  EXPECT_GE(m.boost, m.target_only);
}

// Overlapping classes: measured and logged, not asserted.
TEST(Tradaboost, OverlappingBlobsMeasurement) {
  for (double sep : {0.6, 1.5}) {
    const auto m = shifted_blobs_benchmark(sep, 8);
    RecordProperty("sep" + std::to_string(sep), std::to_string(m.boost) + "/" +
                                                    std::to_string(m.target_only));
    std::cout << "separation " << sep << ": tradaboost " << m.boost << " target-only "
              << m.target_only << "\n";
  }
}

TEST(TrainingRun, CheckpointRestoreContinuesBitwise) {
  testing::World w;
  // Overlapping classes so that boosting runs several rounds.
  features::DatasetRecord rs, rt;
  rs.name = "hard-source";
  rs.similarity_tags = {"hard"};
  rt.name = "hard-target";
  rt.similarity_tags = {"hard"};
  w.features.register_generated(
      rs, {"gaussian_blobs", {{"k", 2}, {"d", 16}, {"n", 600}, {"separation", 0.5}, {"center_seed", 3}}, 1});
  w.features.register_generated(
      rt, {"shifted_blobs",
           {{"k", 2}, {"d", 16}, {"n", 150}, {"separation", 0.5}, {"center_seed", 3}, {"shift", 2.0}},
           2});
  const auto base = testing::publish_pretrained(w, mlp(16, {16}, 2), "p", "hard-source", 2);
  for (TlMethod m : {TlMethod::kFineTune, TlMethod::kTradaboost, TlMethod::kMmdAdapt}) {
    TrainConfig c;
    c.tl_method = m;
    c.base_model_id = base;
    c.dataset_id = "hard-target";
    c.epochs = 4;
    c.boosting_rounds = 4;
    c.lr = 0.03;
    c.aug_preset = "noise-0.05+dropout-0.05";
    c.aug = features::augmentation_preset(*c.aug_preset);
    TrainingRun straight(w.ctx(), c);
    straight.run();

    struct PauseAfter : RunControl {
      int at;
      int seen = 0;
      explicit PauseAfter(int a) : at(a) {}
      bool pause_requested() const override { return seen >= at; }
      void on_epoch(int, double) override { ++seen; }
    } pause(2);
    TrainingRun first(w.ctx(), c);
    EXPECT_EQ(first.run(pause), RunStatus::kPaused);
    testing::TempDir dir;
    save_checkpoint(dir.path(), "j", first.checkpoint());
    auto cp = load_checkpoint(dir.path(), "j");
    ASSERT_TRUE(cp.has_value());
    EXPECT_EQ(*cp, first.checkpoint());
    TrainingRun second(w.ctx(), c);
    second.restore(*cp);
    EXPECT_EQ(second.run(), RunStatus::kCompleted);
    EXPECT_EQ(second.network(), straight.network()) << to_string(m);
    EXPECT_EQ(second.epoch_losses(), straight.epoch_losses());
    EXPECT_EQ(second.evaluate(features::Split::kVal), straight.evaluate(features::Split::kVal));
  }
}

}  // namespace
}  // namespace modelps::trainer
