#include "modelps/features/feature_store.h"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <numeric>
#include <random>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::features {
namespace fs = std::filesystem;
namespace {

std::string slugify(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

nlohmann::json record_json(const DatasetRecord& r) {
  return {{"dataset_id", r.dataset_id},
          {"name", r.name},
          {"kind", r.kind == DatasetKind::kVector ? "vector" : "image_like"},
          {"feature_shape", r.feature_shape},
          {"num_classes", r.num_classes},
          {"splits", {{"train_n", r.splits.train_n}, {"val_n", r.splits.val_n},
                      {"test_n", r.splits.test_n}}},
          {"source", r.source == DatasetSource::kBundledSynthetic ? "bundled_synthetic" : "file"},
          {"similarity_tags", r.similarity_tags}};
}

DatasetRecord record_from_json(const nlohmann::json& j) {
  DatasetRecord r;
  r.dataset_id = j.value("dataset_id", "");
  r.name = j.value("name", r.dataset_id);
  r.kind = j.value("kind", "vector") == "image_like" ? DatasetKind::kImageLike
                                                     : DatasetKind::kVector;
  r.feature_shape = j.value("feature_shape", std::vector<std::int64_t>{});
  r.num_classes = j.value("num_classes", 0);
  r.source = j.value("source", "bundled_synthetic") == "file" ? DatasetSource::kFile
                                                              : DatasetSource::kBundledSynthetic;
  r.similarity_tags = j.value("similarity_tags", std::vector<std::string>{});
  return r;
}

Batch take_rows(const Batch& all, const std::vector<std::size_t>& rows) {
  Batch b;
  b.feature_shape = all.feature_shape;
  const std::size_t d = all.dim();
  b.n = rows.size();
  b.features.reserve(rows.size() * d);
  b.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    auto src = all.row(r);
    b.features.insert(b.features.end(), src.begin(), src.end());
    b.labels.push_back(all.labels[r]);
  }
  return b;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "unknown split '" + std::string(name) + "'",
              {{"path", "/split"}});
}

nlohmann::json to_json(const DatasetRecord& r) { return record_json(r); }

nlohmann::json to_json(const Preview& p) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& pair : p.pairs) {
    pairs.push_back({{"raw", pair.raw},
                     {"augmented", pair.augmented},
                     {"raw_label", pair.raw_label},
                     {"augmented_label", pair.augmented_label}});
  }
  return {{"pairs", pairs},
          {"raw_stats", {{"mean", p.raw_stats.mean}, {"std", p.raw_stats.std}}},
          {"augmented_stats",
           {{"mean", p.augmented_stats.mean}, {"std", p.augmented_stats.std}}}};
}

FeatureStore::FeatureStore(fs::path persist_dir) : persist_dir_(std::move(persist_dir)) {
  fs::create_directories(*persist_dir_);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(*persist_dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file_text(f));
      DatasetRecord rec = record_from_json(doc.at("record"));
      const auto split_seed = doc.value("split_seed", std::uint64_t{0});
      Batch samples;
      if (doc.contains("generator")) {
        samples = generate(generator_from_json(doc["generator"])).samples;
      } else if (doc.contains("csv")) {
        samples = load_csv(*persist_dir_ / doc["csv"].get<std::string>());
      } else {
        samples.feature_shape = rec.feature_shape;
        samples.features = doc.at("features").get<std::vector<double>>();
        samples.labels = doc.at("labels").get<std::vector<int>>();
        samples.n = samples.labels.size();
      }
      insert(std::move(rec), std::move(samples), split_seed, doc);
    } catch (const Error& e) {
      throw Error(ErrorCode::kStoreCorrupt, "corrupt dataset registration " + f.string(),
                  {{"path", f.string()}, {"reason", e.what()}});
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStoreCorrupt, "corrupt dataset registration " + f.string(),
                  {{"path", f.string()}, {"reason", e.what()}});
    }
  }
}

std::string FeatureStore::insert(DatasetRecord record, Batch samples, std::uint64_t split_seed,
                                 nlohmann::json persisted) {
  if (record.dataset_id.empty()) record.dataset_id = slugify(record.name);
  if (record.dataset_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset needs a name or id", {{"path", "/name"}});
  }
  if (record.name.empty()) record.name = record.dataset_id;
  if (record.feature_shape.empty()) record.feature_shape = samples.feature_shape;
  if (record.feature_shape.empty()) {
    record.feature_shape = {static_cast<std::int64_t>(samples.n ? samples.features.size() / samples.n : 0)};
  }
  samples.feature_shape = record.feature_shape;
  std::size_t d = 1;
  for (auto s : record.feature_shape) {
    if (s < 1) throw Error(ErrorCode::kShapeInconsistent, "feature_shape dims must be positive");
    d *= static_cast<std::size_t>(s);
  }
  if (record.kind == DatasetKind::kVector && record.feature_shape.size() != 1) {
    record.kind = DatasetKind::kImageLike;
  }
  if (samples.labels.size() != samples.n || samples.features.size() != samples.n * d) {
    throw Error(ErrorCode::kShapeInconsistent,
                "features/labels do not match " + std::to_string(samples.n) + " x " +
                    std::to_string(d),
                {{"n", samples.n}, {"dim", d}, {"features", samples.features.size()},
                 {"labels", samples.labels.size()}});
  }
  if (record.num_classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "num_classes must be >= 2",
                {{"path", "/num_classes"}});
  }
  for (std::size_t i = 0; i < samples.n; ++i) {
    if (samples.labels[i] < 0 || samples.labels[i] >= record.num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label " + std::to_string(samples.labels[i]) + " at row " + std::to_string(i) +
                      " is outside [0, " + std::to_string(record.num_classes) + ")",
                  {{"row", i}, {"label", samples.labels[i]}});
    }
  }
  const std::size_t n = samples.n;
  record.splits = {n * 8 / 10, n / 10, n - n * 8 / 10 - n / 10};
  if (record.splits.train_n < 1 || record.splits.val_n < 1) {
    throw Error(ErrorCode::kShapeInconsistent,
                "dataset with " + std::to_string(n) + " samples leaves an empty train/val split",
                {{"n", n}});
  }

  auto e = std::make_shared<Entry>();
  e->order.resize(n);
  std::iota(e->order.begin(), e->order.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed({split_seed, static_cast<std::uint64_t>(n), 0x5B117ULL}));
  std::shuffle(e->order.begin(), e->order.end(), rng);
  e->samples = std::move(samples);
  e->record = record;
  persisted["record"] = record_json(record);
  persisted["split_seed"] = split_seed;
  e->persisted = std::move(persisted);

  std::unique_lock lock(mu_);
  auto it = entries_.find(record.dataset_id);
  if (it != entries_.end()) {
    if (it->second->samples == e->samples && it->second->order == e->order) {
      return record.dataset_id;
    }
    throw Error(ErrorCode::kInvalidArgument,
                "dataset id '" + record.dataset_id + "' is already registered",
                {{"dataset_id", record.dataset_id}});
  }
  entries_.emplace(record.dataset_id, e);
  return record.dataset_id;
}

std::string FeatureStore::register_dataset(DatasetRecord record, Batch samples,
                                           std::uint64_t split_seed) {
  nlohmann::json persisted = {{"features", samples.features}, {"labels", samples.labels}};
  record.source = DatasetSource::kFile;
  std::string id = insert(std::move(record), std::move(samples), split_seed, persisted);
  if (persist_dir_) {
    std::shared_lock lock(mu_);
    write_file_atomic(*persist_dir_ / (id + ".json"), entries_.at(id)->persisted.dump());
  }
  return id;
}

std::string FeatureStore::register_generated(DatasetRecord record, const GeneratorSpec& spec) {
  GeneratedData data = generate(spec);
  record.num_classes = data.num_classes;
  if (record.feature_shape.empty()) record.feature_shape = data.feature_shape;
  record.source = DatasetSource::kBundledSynthetic;
  std::string id =
      insert(std::move(record), std::move(data.samples), spec.seed, {{"generator", to_json(spec)}});
  if (persist_dir_ && !fs::exists(*persist_dir_ / (id + ".json"))) {
    std::shared_lock lock(mu_);
    write_file_atomic(*persist_dir_ / (id + ".json"), entries_.at(id)->persisted.dump());
  }
  return id;
}

std::string FeatureStore::register_csv(DatasetRecord record, const fs::path& csv) {
  Batch samples = load_csv(csv);
  record.source = DatasetSource::kFile;
  if (record.num_classes == 0 && !samples.labels.empty()) {
    record.num_classes = *std::max_element(samples.labels.begin(), samples.labels.end()) + 1;
  }
  std::string id = insert(std::move(record), std::move(samples), 0, nlohmann::json::object());
  if (persist_dir_) {
    const std::string csv_name = id + ".csv";
    fs::copy_file(csv, *persist_dir_ / csv_name, fs::copy_options::overwrite_existing);
    std::shared_lock lock(mu_);
    nlohmann::json doc = entries_.at(id)->persisted;
    doc["csv"] = csv_name;
    write_file_atomic(*persist_dir_ / (id + ".json"), doc.dump());
  }
  return id;
}

const FeatureStore::Entry& FeatureStore::entry(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kUnknownDataset, "unknown dataset '" + id + "'",
                {{"dataset_id", id}});
  }
  return *it->second;
}

bool FeatureStore::contains(const std::string& id) const {
  std::shared_lock lock(mu_);
  return entries_.count(id) > 0;
}

DatasetRecord FeatureStore::get(const std::string& id) const { return entry(id).record; }

std::vector<DatasetRecord> FeatureStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<DatasetRecord> out;
  for (const auto& [_, e] : entries_) out.push_back(e->record);
  return out;
}

Batch FeatureStore::split(const std::string& id, Split split) const {
  const Entry& e = entry(id);
  const auto& s = e.record.splits;
  std::size_t begin = 0, count = s.train_n;
  if (split == Split::kVal) {
    begin = s.train_n;
    count = s.val_n;
  } else if (split == Split::kTest) {
    begin = s.train_n + s.val_n;
    count = s.test_n;
  }
  std::vector<std::size_t> rows(e.order.begin() + static_cast<std::ptrdiff_t>(begin),
                                e.order.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return take_rows(e.samples, rows);
}

FeatureStats FeatureStore::stats(const std::string& id, Split s) const {
  return compute_stats(split(id, s));
}

Batch FeatureStore::get_batch(const std::string& id, Split s, std::size_t n,
                              const AugmentationSpec& aug, std::uint64_t seed,
                              bool with_replacement) const {
  Batch all = split(id, s);
  if (all.n == 0) {
    throw Error(ErrorCode::kEmptySplit,
                "split '" + std::string(to_string(s)) + "' of '" + id + "' is empty",
                {{"dataset_id", id}, {"split", std::string(to_string(s))}});
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (n > all.n && !with_replacement) {
    throw Error(ErrorCode::kInvalidArgument,
                "requested " + std::to_string(n) + " samples from a split of " +
                    std::to_string(all.n) + " without replacement",
                {{"n", n}, {"split_size", all.n}});
  }
  std::mt19937_64 rng(mix_seed({seed, 0xBA7C4ULL}));
  std::vector<std::size_t> rows;
  if (with_replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, all.n - 1);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(pick(rng));
  } else {
    rows.resize(all.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(n);
  }
  Batch b = take_rows(all, rows);
  return augment(b, aug, get(id).num_classes, seed);
}

Preview FeatureStore::preview(const std::string& id, const AugmentationSpec& aug,
                              std::size_t k) const {
  const DatasetRecord rec = get(id);
  Batch raw = split(id, Split::kTrain);
  Batch augmented = augment(raw, aug, rec.num_classes, 0);
  Preview p;
  p.raw_stats = compute_stats(raw);
  p.augmented_stats = compute_stats(augmented);
  const std::size_t take = std::min(k, raw.n);
  for (std::size_t i = 0; i < take; ++i) {
    auto r = raw.row(i);
    auto a = augmented.row(i);
    p.pairs.push_back({{r.begin(), r.end()}, {a.begin(), a.end()}, raw.labels[i],
                       augmented.labels[i]});
  }
  return p;
}

void register_bundled(FeatureStore& store) {
  struct Bundled {
    const char* id;
    const char* name;
    const char* kind;
    nlohmann::json params;
    std::uint64_t seed;
    std::vector<std::string> tags;
  };
  const std::vector<Bundled> bundled = {
      {"blobs-source", "Gaussian blobs (source)", "gaussian_blobs",
       {{"k", 2}, {"d", 16}, {"n", 1000}, {"center_seed", 11}}, 1,
       {"synthetic-blobs", "natural-images"}},
      {"blobs-target", "Shifted blobs (target)", "shifted_blobs",
       {{"k", 2}, {"d", 16}, {"n", 600}, {"shift", 2.0}, {"center_seed", 11}}, 2,
       {"synthetic-blobs", "natural-images"}},
      {"blobs-target-small", "Shifted blobs (small target)", "shifted_blobs",
       {{"k", 2}, {"d", 16}, {"n", 125}, {"shift", 2.0}, {"center_seed", 11}}, 3,
       {"synthetic-blobs", "street-scenes"}},
      {"blobs-3c", "Gaussian blobs, 3 classes", "gaussian_blobs",
       {{"k", 3}, {"d", 16}, {"n", 600}, {"center_seed", 5}}, 4, {"synthetic-blobs"}},
      {"two-moons", "Two moons", "two_moons", {{"n", 600}, {"noise", 0.1}}, 5, {"toy-2d"}},
      {"text-public", "Public text embeddings", "gaussian_blobs",
       {{"k", 4}, {"d", 32}, {"n", 1200}, {"center_seed", 21}, {"separation", 3.0}}, 6,
       {"text", "public-corpus"}},
      {"text-private", "Private text embeddings", "shifted_blobs",
       {{"k", 4}, {"d", 32}, {"n", 400}, {"center_seed", 21}, {"separation", 3.0},
        {"shift", 1.0}},
       7, {"text", "private-corpus"}},
  };
  for (const auto& b : bundled) {
    DatasetRecord rec;
    rec.dataset_id = b.id;
    rec.name = b.name;
    rec.similarity_tags = b.tags;
    store.register_generated(rec, {b.kind, b.params, b.seed});
  }
}

}  // namespace modelps::features
