#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelps/features/augmentation.h"

namespace modelps::features {

enum class DatasetKind { kVector, kImageLike };
enum class DatasetSource { kBundledSynthetic, kFile };
enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

struct SplitSizes {
  std::size_t train_n = 0;
  std::size_t val_n = 0;
  std::size_t test_n = 0;
  bool operator==(const SplitSizes&) const = default;
};

struct DatasetRecord {
  std::string dataset_id;
  std::string name;
  DatasetKind kind = DatasetKind::kVector;
  std::vector<std::int64_t> feature_shape;
  int num_classes = 2;
  SplitSizes splits;
  DatasetSource source = DatasetSource::kBundledSynthetic;
  std::vector<std::string> similarity_tags;
};

nlohmann::json to_json(const DatasetRecord& r);

// {kind, params, seed}. Kinds: "gaussian_blobs", "shifted_blobs", "two_moons".
struct GeneratorSpec {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const nlohmann::json& j);

struct GeneratedData {
  std::vector<std::int64_t> feature_shape;
  int num_classes = 2;
  Batch samples;
};

// Deterministic in (kind, params, seed).
GeneratedData generate(const GeneratorSpec& spec);

// CSV with a header row; the label column is named "label", every other
// column is a numeric feature.
Batch load_csv(const std::filesystem::path& path);

// Jaccard overlap of two tag sets.
double tag_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct PreviewPair {
  std::vector<double> raw;
  std::vector<double> augmented;
  int raw_label = 0;
  int augmented_label = 0;
};

struct Preview {
  std::vector<PreviewPair> pairs;
  FeatureStats raw_stats;        // over the full train split
  FeatureStats augmented_stats;  // same samples after augmentation
};

nlohmann::json to_json(const Preview& p);

// Dataset registry. Reads are concurrent; registrations are serialized.
// When constructed with a directory, registrations are persisted there and
// reloaded on construction.
class FeatureStore {
 public:
  FeatureStore() = default;
  explicit FeatureStore(std::filesystem::path persist_dir);

  // Registers in-memory samples. Split sizes in `record` are ignored and
  // recomputed with the default 80/10/10 seed-stable split. Returns the id;
  // an empty id is derived from the name.
  std::string register_dataset(DatasetRecord record, Batch samples,
                               std::uint64_t split_seed = 0);
  std::string register_generated(DatasetRecord record, const GeneratorSpec& spec);
  std::string register_csv(DatasetRecord record, const std::filesystem::path& csv);

  bool contains(const std::string& id) const;
  DatasetRecord get(const std::string& id) const;
  std::vector<DatasetRecord> list() const;

  // Raw split in seed-stable order.
  Batch split(const std::string& id, Split split) const;
  FeatureStats stats(const std::string& id, Split split) const;

  Batch get_batch(const std::string& id, Split split, std::size_t n,
                  const AugmentationSpec& aug, std::uint64_t seed,
                  bool with_replacement = false) const;

  Preview preview(const std::string& id, const AugmentationSpec& aug, std::size_t k) const;

 private:
  struct Entry {
    DatasetRecord record;
    Batch samples;
    std::vector<std::size_t> order;  // permutation; train | val | test
    nlohmann::json persisted;        // how to rebuild on reload
  };

  std::string insert(DatasetRecord record, Batch samples, std::uint64_t split_seed,
                     nlohmann::json persisted);
  const Entry& entry(const std::string& id) const;

  std::optional<std::filesystem::path> persist_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const Entry>> entries_;
};

// Registers the synthetic datasets available on every boot.
void register_bundled(FeatureStore& store);

}  // namespace modelps::features
