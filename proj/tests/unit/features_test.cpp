#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "modelps/error.h"
#include "modelps/features/augmentation.h"
#include "modelps/features/feature_store.h"
#include "support/support.h"

namespace modelps::features {
namespace {

GeneratorSpec blobs(int k, int d, int n, std::uint64_t seed = 1) {
  return {"gaussian_blobs", {{"k", k}, {"d", d}, {"n", n}}, seed};
}

DatasetRecord record(const std::string& name) {
  DatasetRecord r;
  r.name = name;
  return r;
}

TEST(FeatureStore, DefaultSplitIsEightyTenTen) {
  FeatureStore fs;
  const auto id = fs.register_generated(record("b3"), blobs(3, 16, 600));
  const auto r = fs.get(id);
  EXPECT_EQ(r.splits, (SplitSizes{480, 60, 60}));
  EXPECT_EQ(r.num_classes, 3);
  EXPECT_EQ(r.feature_shape, (std::vector<std::int64_t>{16}));
  EXPECT_EQ(fs.split(id, Split::kTrain).n, 480u);
}

TEST(FeatureStore, LabelOutOfRange) {
  FeatureStore fs;
  auto r = record("bad");
  r.num_classes = 2;
  Batch b;
  b.feature_shape = {1};
  b.n = 3;
  b.features = {0, 1, 2};
  b.labels = {0, 1, 2};
  try {
    fs.register_dataset(r, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelOutOfRange);
  }
  EXPECT_FALSE(fs.contains("bad"));
}

TEST(FeatureStore, SameGeneratorSpecIsBitwiseIdentical) {
  FeatureStore a, b;
  const auto ia = a.register_generated(record("x"), blobs(2, 8, 200, 42));
  const auto ib = b.register_generated(record("x"), blobs(2, 8, 200, 42));
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    EXPECT_EQ(a.split(ia, s), b.split(ib, s));
  }
  EXPECT_NE(generate(blobs(2, 8, 200, 42)).samples, generate(blobs(2, 8, 200, 43)).samples);
}

TEST(GetBatch, IdentityAndNormalize) {
  FeatureStore fs;
  const auto id = fs.register_generated(record("x"), blobs(2, 6, 400));
  const Batch raw = fs.split(id, Split::kTrain);
  // Identity pipeline: the batch is a reordering of raw rows.
  const Batch same = fs.get_batch(id, Split::kTrain, raw.n, {}, 0);
  auto rows = [](const Batch& b) {
    std::vector<std::pair<std::vector<double>, int>> out;
    for (std::size_t i = 0; i < b.n; ++i) {
      auto r = b.row(i);
      out.emplace_back(std::vector<double>(r.begin(), r.end()), b.labels[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(rows(same), rows(raw));

  const auto st = compute_stats(raw);
  AugmentationSpec norm;
  norm.steps.push_back(Normalize{st.mean, st.std});
  const Batch z = fs.get_batch(id, Split::kTrain, raw.n, norm, 0);
  const auto zs = compute_stats(z);
  for (std::size_t d = 0; d < zs.mean.size(); ++d) {
    EXPECT_LT(std::abs(zs.mean[d]), 1e-6);
    EXPECT_NEAR(zs.std[d], 1.0, 1e-6);
  }
}

TEST(GetBatch, NoiseIsSeedReproducible) {
  FeatureStore fs;
  const auto id = fs.register_generated(record("x"), blobs(2, 6, 400));
  AugmentationSpec noise;
  noise.steps.push_back(GaussianNoise{0.1});
  const auto a = fs.get_batch(id, Split::kTrain, 64, noise, 1);
  const auto b = fs.get_batch(id, Split::kTrain, 64, noise, 1);
  const auto c = fs.get_batch(id, Split::kTrain, 64, noise, 2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.features, c.features);
}

TEST(Augment, LabelNoiseAndValidation) {
  Batch b;
  b.feature_shape = {1};
  b.n = 1000;
  b.features.assign(1000, 1.0);
  b.labels.assign(1000, 0);
  AugmentationSpec spec;
  spec.steps.push_back(LabelNoise{1.0});
  const auto out = augment(b, spec, 3, 7);
  for (int l : out.labels) EXPECT_NE(l, 0);
  AugmentationSpec bad;
  bad.steps.push_back(FeatureDropout{1.5});
  EXPECT_THROW(validate(bad), Error);
  EXPECT_EQ(augmentation_from_json(nlohmann::json::parse(to_json(spec).dump())), spec);
}

TEST(Preview, EmptyIdentityAndFullDropout) {
  FeatureStore fs;
  const auto id = fs.register_generated(record("x"), blobs(2, 6, 200));
  const auto empty = fs.preview(id, {}, 0);
  EXPECT_TRUE(empty.pairs.empty());
  EXPECT_EQ(empty.raw_stats.mean.size(), 6u);

  for (const auto& p : fs.preview(id, {}, 5).pairs) EXPECT_EQ(p.raw, p.augmented);

  AugmentationSpec drop;
  drop.steps.push_back(FeatureDropout{1.0});
  const auto dropped = fs.preview(id, drop, 5);
  ASSERT_EQ(dropped.pairs.size(), 5u);
  for (const auto& p : dropped.pairs) {
    for (double v : p.augmented) EXPECT_EQ(v, 0.0);
  }
}

TEST(FeatureStore, CsvRegistration) {
  testing::TempDir dir;
  const auto path = dir.path() / "d.csv";
  {
    std::ofstream out(path);
    out << "x1,x2,label\n";
    for (int i = 0; i < 50; ++i) out << i << "," << -i << "," << (i % 2) << "\n";
  }
  FeatureStore fs;
  auto r = record("csv");
  const auto id = fs.register_csv(r, path);
  EXPECT_EQ(fs.get(id).splits, (SplitSizes{40, 5, 5}));
  EXPECT_EQ(fs.get(id).feature_shape, (std::vector<std::int64_t>{2}));
}

TEST(FeatureStore, PersistsAndReloads) {
  testing::TempDir dir;
  Batch before;
  {
    FeatureStore fs(dir.path());
    register_bundled(fs);
    before = fs.split("blobs-target", Split::kVal);
  }
  FeatureStore again(dir.path());
  EXPECT_TRUE(again.contains("text-private"));
  EXPECT_EQ(again.split("blobs-target", Split::kVal), before);
}

TEST(Tags, JaccardOverlap) {
  EXPECT_DOUBLE_EQ(tag_overlap({"a", "b"}, {"b", "c"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(tag_overlap({"a"}, {"a"}), 1.0);
  EXPECT_DOUBLE_EQ(tag_overlap({}, {}), 0.0);
}

TEST(Presets, AllParse) {
  for (const auto& name : augmentation_presets()) EXPECT_NO_THROW(augmentation_preset(name));
  EXPECT_THROW(augmentation_preset("nope"), Error);
}

}  // namespace
}  // namespace modelps::features
