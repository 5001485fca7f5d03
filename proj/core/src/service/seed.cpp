#include "modelps/service/seed.h"

#include "modelps/error.h"
#include "modelps/genie/query.h"
#include "modelps/trainer/training_run.h"
#include "modelps/util.h"

namespace modelps::service {
namespace {

using graph::LayerKind;
using graph::LayerNode;
using graph::ModelGraph;

void chain(ModelGraph& g, LayerNode node) {
  if (!g.nodes.empty()) g.edges.push_back({g.nodes.back().id, node.id});
  g.nodes.push_back(std::move(node));
}

ModelGraph mlp(std::int64_t in, const std::vector<std::int64_t>& hidden, std::int64_t classes) {
  ModelGraph g;
  g.input_shape = {in};
  std::int64_t prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const std::string k = std::to_string(i + 1);
    chain(g, {"fc" + k, "Dense " + k, LayerKind::kDense,
              {{"in_features", double(prev)}, {"out_features", double(hidden[i])}, {"bias", 1}}});
    chain(g, {"relu" + k, "ReLU " + k, LayerKind::kRelu, {}});
    prev = hidden[i];
  }
  chain(g, {"head", "Classifier", LayerKind::kDense,
            {{"in_features", double(prev)}, {"out_features", double(classes)}, {"bias", 1}}});
  chain(g, {"prob", "Softmax", LayerKind::kSoftmax, {}});
  return g;
}

// Coarse stand-in for a ResNet-50 backbone; shape-checked and cost-modeled
// only.
ModelGraph resnet_like() {
  ModelGraph g;
  g.input_shape = {3, 224, 224};
  auto conv = [&](const std::string& id, double in, double out, double k, double s, double p) {
    chain(g, {id, id, LayerKind::kConv2d,
              {{"in_channels", in}, {"out_channels", out}, {"kernel", k}, {"stride", s}, {"padding", p}}});
    chain(g, {id + "_relu", id + " ReLU", LayerKind::kRelu, {}});
  };
  conv("conv1", 3, 64, 7, 2, 3);
  chain(g, {"pool1", "MaxPool", LayerKind::kMaxPool2d, {{"kernel", 3}, {"stride", 2}}});
  conv("stage2", 64, 256, 3, 1, 1);
  conv("stage3", 256, 512, 3, 2, 1);
  conv("stage4", 512, 1024, 3, 2, 1);
  conv("stage5", 1024, 2048, 3, 2, 1);
  chain(g, {"gap", "Global pool", LayerKind::kMaxPool2d, {{"kernel", 7}, {"stride", 1}}});
  chain(g, {"flatten", "Flatten", LayerKind::kFlatten, {}});
  chain(g, {"fc", "Classifier", LayerKind::kDense,
            {{"in_features", 2048}, {"out_features", 1000}, {"bias", 1}}});
  chain(g, {"prob", "Softmax", LayerKind::kSoftmax, {}});
  graph::validate(g);
  return g;
}

std::optional<std::string> find_by_name(const repo::Repository& r, const std::string& name) {
  repo::Query q;
  q.name_contains = name;
  for (const auto& m : r.retrieve(q)) {
    if (m.name == name) return m.model_id;
  }
  return std::nullopt;
}

std::string train_demo(repo::Repository& repository, features::FeatureStore& features,
                       const std::string& name, repo::Task task, ModelGraph g,
                       const std::string& dataset) {
  if (auto id = find_by_name(repository, name)) return *id;
  trainer::TrainConfig c;
  c.tl_method = trainer::TlMethod::kFromScratch;
  c.dataset_id = dataset;
  c.graph = g;
  c.epochs = 5;
  c.lr = 0.05;
  c.seed = 7;
  trainer::TrainingRun run({&repository, &features}, c);
  run.run();
  auto report = run.report();
  repo::PublishRequest pr;
  pr.name = name;
  pr.task = task;
  pr.graph = std::move(g);
  pr.author = "seed";
  pr.metadata.pretrained_dataset = dataset;
  pr.metadata.accuracy = report.accuracy;
  // Measured latencies jitter; a fixed value keeps the seeded record (and
  // its id) stable across boots.
  pr.metadata.latency_ms = 0.01;
  pr.metadata.evaluator = "real";
  return repository.publish(pr, repo::encode_tensors(run.network().to_tensors()));
}

}  // namespace

std::vector<std::string> seed_store(repo::Repository& repository,
                                    features::FeatureStore& features,
                                    genie::HistoryLog& history,
                                    const genie::SurfaceConfig& surface) {
  features::register_bundled(features);
  std::vector<std::string> ids;
  ids.push_back(train_demo(repository, features, "mlp-blobs", repo::Task::kTabularClassification,
                           mlp(16, {32}, 2), "blobs-source"));
  ids.push_back(train_demo(repository, features, "mlp-blobs-wide",
                           repo::Task::kTabularClassification, mlp(16, {64, 64}, 2),
                           "blobs-source"));
  ids.push_back(train_demo(repository, features, "text-mlp", repo::Task::kTextClassification,
                           mlp(32, {128, 64}, 4), "text-public"));
  if (auto id = find_by_name(repository, "resnet50-imagenet")) {
    ids.push_back(*id);
  } else {
    repo::PublishRequest pr;
    pr.name = "resnet50-imagenet";
    pr.task = repo::Task::kImageClassification;
    pr.graph = resnet_like();
    pr.author = "seed";
    pr.metadata.pretrained_dataset = "ImageNet";
    pr.metadata.accuracy = 0.761;
    pr.metadata.latency_ms = 25.0;
    pr.metadata.evaluator = "uploaded";
    ids.push_back(repository.publish(pr, repo::encode_tensors(repo::TensorBundle{})));
  }

  if (history.size() == 0) {
    genie::SimulatedEvaluator sim(surface, &repository, &features);
    const double lrs[] = {0.01, 0.003, 0.03};
    for (int i = 0; i < 3; ++i) {
      trainer::TrainConfig c;
      c.base_model_id = ids[0];
      c.dataset_id = "blobs-target";
      c.lr = lrs[i];
      c.epochs = 5;
      c.seed = static_cast<std::uint64_t>(i);
      history.append(genie::make_record(c, sim.evaluate(c), repo::Task::kTabularClassification,
                                        now_ms(), "seed"));
    }
  }
  return ids;
}

}  // namespace modelps::service
