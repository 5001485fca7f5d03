#include <random>

#include <benchmark/benchmark.h>

#include "modelps/genie/query.h"
#include "modelps/graph/draft.h"
#include "modelps/trainer/training_run.h"
#include "support/fixtures.h"
#include "support/genie_gen.h"

namespace modelps {
namespace {

void BM_SearchHistory(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<genie::HistoryRecord> history;
  for (int i = 0; i < state.range(0); ++i) history.push_back(testing::random_record(rng));
  std::vector<genie::GenieRequest> requests;
  for (int i = 0; i < 64; ++i) requests.push_back(testing::random_request(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& q = requests[i++ % requests.size()];
    benchmark::DoNotOptimize(genie::search_history(q, trainer::TlMethod::kFineTune, history));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchHistory)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_Retrieve(benchmark::State& state) {
  auto repo = testing::memory_repository();
  std::mt19937_64 rng(2);
  for (int i = 0; i < state.range(0); ++i) {
    testing::publish_untrained(*repo, testing::mlp(4, {8}, 2), "m" + std::to_string(i), "d",
                               double(rng() % 100) / 100.0);
  }
  repo::Query q;
  q.min_accuracy = 0.5;
  q.sort = repo::SortKey::kAccuracy;
  q.descending = true;
  q.limit = 10;
  for (auto _ : state) benchmark::DoNotOptimize(repo->retrieve(q));
}
BENCHMARK(BM_Retrieve)->Arg(100)->Arg(1000);

void BM_TrainStep(benchmark::State& state) {
  features::FeatureStore store;
  features::register_bundled(store);
  const auto hidden = static_cast<std::int64_t>(state.range(0));
  auto net = trainer::Network::from_graph(testing::mlp(16, {hidden, hidden}, 2));
  net.init_all(3);
  auto opt = net.zero_state();
  trainer::TrainConfig cfg;
  cfg.lr = 0.01;
  const auto batch = store.get_batch("blobs-source", features::Split::kTrain, 32, {}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(trainer::train_step(net, opt, batch, cfg));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128);

void BM_DraftRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto draft = testing::random_draft(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graph::parse_draft(graph::serialize_draft(draft)));
  }
}
BENCHMARK(BM_DraftRoundTrip);

}  // namespace
}  // namespace modelps

BENCHMARK_MAIN();
