#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "modelps/error.h"
#include "modelps/repository/repository.h"
#include "modelps/repository/tensor_bundle.h"
#include "support/oracles.h"
#include "support/support.h"

namespace modelps::repo {
namespace {

using testing::mlp;

PublishRequest request(const std::string& name, double acc = 0.9, double lat = 1.0) {
  PublishRequest r;
  r.name = name;
  r.task = Task::kTabularClassification;
  r.graph = mlp(4, {8}, 2);
  r.metadata.pretrained_dataset = "blobs-source";
  r.metadata.accuracy = acc;
  r.metadata.latency_ms = lat;
  return r;
}

std::vector<std::uint8_t> some_weights(double v = 0.5) {
  TensorBundle b;
  b.tensors.push_back({"fc1", "weight", {2, 2}, {v, -v, 0.25, 1e-3}});
  return encode_tensors(b);
}

TEST(TensorBundle, RoundTripBothDtypes) {
  TensorBundle b;
  b.tensors.push_back({"a", "weight", {2, 3}, {1, 2, 3, 4, 5, 6.5}});
  b.tensors.push_back({"a", "bias", {2}, {-1, 0.125}});
  EXPECT_EQ(decode_tensors(encode_tensors(b)), b);
  b.dtype = DType::kFloat64;
  b.tensors[0].values[0] = 0.1;
  EXPECT_EQ(decode_tensors(encode_tensors(b)), b);
  std::vector<std::uint8_t> junk = {1, 2, 3};
  EXPECT_THROW(decode_tensors(junk), Error);
}

TEST(Repository, PublishRetrieveRoundTrip) {
  auto repo = testing::memory_repository();
  PublishRequest r = request("resnet50-imagenet", 0.761, 25.0);
  r.task = Task::kImageClassification;
  r.metadata.pretrained_dataset = "ImageNet";
  r.metadata.evaluator = "uploaded";
  const auto w = some_weights();
  const std::string id = repo->publish(r, w);
  const ModelRecord got = repo->get(id);
  EXPECT_EQ(got.name, r.name);
  EXPECT_EQ(got.graph, r.graph);
  EXPECT_EQ(got.metadata.pretrained_dataset, "ImageNet");
  EXPECT_EQ(got.metadata.params, graph::count_params(r.graph));
  EXPECT_EQ(*repo->fetch_weights(id), w);
  EXPECT_EQ(record_from_json(to_json(got)), got);
  EXPECT_EQ(repo->retrieve({}).size(), 1u);
}

TEST(Repository, PublishIsIdempotent) {
  auto repo = testing::memory_repository();
  const auto a = repo->publish(request("m"), some_weights());
  const auto b = repo->publish(request("m"), some_weights());
  EXPECT_EQ(a, b);
  EXPECT_EQ(repo->size(), 1u);
  EXPECT_NE(repo->publish(request("m"), some_weights(0.75)), a);
}

TEST(Repository, DanglingParentAndMissingMetadata) {
  auto repo = testing::memory_repository();
  auto r = request("child");
  r.metadata.parent_model_id = "nonexistent";
  try {
    repo->publish(r, some_weights());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDanglingParent);
  }
  auto m = request("x");
  m.metadata.pretrained_dataset.clear();
  try {
    repo->publish(m, some_weights());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMetadata);
  }
  EXPECT_EQ(repo->size(), 0u);
  EXPECT_THROW(metadata_from_json(nlohmann::json{{"accuracy", 0.5}}), Error);
}

TEST(Repository, RetrieveFilters) {
  auto repo = testing::memory_repository();
  EXPECT_TRUE(repo->retrieve({}).empty());
  repo->publish(request("a", 0.85), some_weights());
  const auto hit = repo->publish(request("b", 0.93), some_weights());
  repo->publish(request("c", 0.70), some_weights());
  Query q;
  q.min_accuracy = 0.9;
  auto out = repo->retrieve(q);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].model_id, hit);
}

TEST(Repository, RetrieveMatchesLinearScanOracle) {
  auto repo = testing::memory_repository();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::string> ids;
  const std::vector<std::string> names = {"alpha", "beta", "gamma", "alphabet", "delta"};
  for (int i = 0; i < 1000; ++i) {
    auto r = request(names[rng() % names.size()] + std::to_string(rng() % 50),
                     std::round(u(rng) * 20) / 20, std::round(u(rng) * 100));
    r.task = static_cast<Task>(rng() % 3);
    r.graph = mlp(4, {std::int64_t(rng() % 4 + 1) * 4}, 2);
    if (!ids.empty() && rng() % 3 == 0) r.metadata.parent_model_id = ids[rng() % ids.size()];
    ids.push_back(repo->publish(r, some_weights(double(i))));
  }
  const auto all = repo->retrieve({});
  ASSERT_EQ(all.size(), 1000u);
  for (int i = 0; i < 100; ++i) {
    Query q;
    if (rng() % 2) q.task = static_cast<Task>(rng() % 3);
    if (rng() % 3 == 0) q.name_contains = names[rng() % names.size()].substr(0, 3);
    if (rng() % 2) q.min_accuracy = std::round(u(rng) * 20) / 20;
    if (rng() % 2) q.max_latency_ms = std::round(u(rng) * 100);
    if (rng() % 5 == 0) q.parent_model_id = ids[rng() % ids.size()];
    q.sort = static_cast<SortKey>(rng() % 6);
    q.descending = rng() % 2;
    if (rng() % 2) q.limit = rng() % 30;
    const auto got = repo->retrieve(q);
    const auto want = oracle::retrieve(all, q);
    ASSERT_EQ(got.size(), want.size()) << i;
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_EQ(got[k].model_id, want[k].model_id);
  }
}

TEST(Repository, FileStorePersistsAcrossInstances) {
  testing::TempDir dir;
  std::string id;
  {
    Repository repo(std::make_shared<FileDocumentStore>(dir.path()),
                    std::make_shared<FileBlobStore>(dir.path() / "blobs"));
    id = repo.publish(request("persisted"), some_weights());
  }
  Repository again(std::make_shared<FileDocumentStore>(dir.path()),
                   std::make_shared<FileBlobStore>(dir.path() / "blobs"));
  EXPECT_EQ(again.get(id).name, "persisted");
  EXPECT_EQ(*again.fetch_weights(id), some_weights());
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "models" / (id + ".json")));
}

TEST(Repository, CorruptDocumentIsReported) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir.path() / "models");
  write_file_atomic(dir.path() / "models" / "m-bad.json", std::string_view("{broken"));
  try {
    Repository repo(std::make_shared<FileDocumentStore>(dir.path()),
                    std::make_shared<FileBlobStore>(dir.path() / "blobs"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStoreCorrupt);
  }
}

TEST(Drafts, SaveLoadBumpsRevision) {
  auto repo = testing::memory_repository();
  graph::Draft d{mlp(4, {8}, 2), "m-1", nlohmann::ordered_json::object(), 0, "ana"};
  auto saved = repo->save_draft(d);
  EXPECT_EQ(saved.draft.revision, 1);
  auto loaded = repo->load_draft(saved.draft_id);
  EXPECT_EQ(loaded.draft.graph, d.graph);
  EXPECT_EQ(loaded.draft.revision, d.revision + 1);
  try {
    repo->load_draft("missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownDraft);
  }
}

TEST(Drafts, ConcurrentSavesFromSameRevision) {
  for (int round = 0; round < 20; ++round) {
    auto repo = testing::memory_repository();
    graph::Draft d{mlp(4, {8}, 2), "", nlohmann::ordered_json::object(), 0, "ana"};
    const auto first = repo->save_draft(d);
    std::atomic<int> ok{0}, stale{0};
    auto attempt = [&](std::int64_t width) {
      graph::Draft edit = first.draft;
      edit.graph = mlp(4, {width}, 2);
      try {
        repo->save_draft(edit, first.draft_id);
        ++ok;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kStaleRevision) ++stale;
      }
    };
    std::thread a(attempt, 16), b(attempt, 32);
    a.join();
    b.join();
    EXPECT_EQ(ok.load(), 1);
    EXPECT_EQ(stale.load(), 1);
    EXPECT_EQ(repo->load_draft(first.draft_id).draft.revision, 2);
  }
}

TEST(Lineage, ChainAndRoot) {
  auto repo = testing::memory_repository();
  const auto a = repo->publish(request("a"), some_weights());
  auto rb = request("b");
  rb.metadata.parent_model_id = a;
  const auto b = repo->publish(rb, some_weights());
  auto rc = request("c");
  rc.metadata.parent_model_id = b;
  const auto c = repo->publish(rc, some_weights());
  auto chain = repo->lineage(c);
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[0].model_id, a);
  EXPECT_EQ(chain[1].model_id, b);
  EXPECT_EQ(chain[2].model_id, c);
  EXPECT_EQ(repo->lineage(a).size(), 1u);
}

TEST(Lineage, CorruptCycleIsDetected) {
  auto docs = std::make_shared<MemoryDocumentStore>();
  auto blobs = std::make_shared<MemoryBlobStore>();
  std::string a, b;
  {
    Repository repo(docs, blobs);
    a = repo.publish(request("a"), some_weights());
    auto rb = request("b");
    rb.metadata.parent_model_id = a;
    b = repo.publish(rb, some_weights());
  }
  auto doc = *docs->get("models", a);
  doc["metadata"]["parent_model_id"] = b;
  docs->put("models", a, doc);
  Repository reopened(docs, blobs);
  try {
    reopened.lineage(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLineageCycle);
  }
}

TEST(Repository, WeightCacheFetchesOnce) {
  auto repo = testing::memory_repository();
  const auto id = repo->publish(request("a"), some_weights());
  auto p1 = repo->fetch_weights(id);
  auto p2 = repo->fetch_weights(id);
  EXPECT_EQ(p1.get(), p2.get());
  EXPECT_EQ(repo->cached_blobs(), 1u);
}

}  // namespace
}  // namespace modelps::repo
