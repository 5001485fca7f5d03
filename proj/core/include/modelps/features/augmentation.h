#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace modelps::features {

// Row-major n x dim feature matrix plus integer labels.
struct Batch {
  std::vector<std::int64_t> feature_shape;
  std::size_t n = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t dim() const { return n == 0 ? feature_dim() : features.size() / n; }
  std::size_t feature_dim() const;
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim(), dim()};
  }

  bool operator==(const Batch&) const = default;
};

// Mean/std vectors broadcast when they hold one element.
struct Normalize {
  std::vector<double> mean;
  std::vector<double> std;
  bool operator==(const Normalize&) const = default;
};
struct GaussianNoise {
  double sigma = 0.0;
  bool operator==(const GaussianNoise&) const = default;
};
// Zeroes each feature independently with probability p (no rescaling).
struct FeatureDropout {
  double p = 0.0;
  bool operator==(const FeatureDropout&) const = default;
};
// Replaces a label with a uniformly drawn different class with probability p.
struct LabelNoise {
  double p = 0.0;
  bool operator==(const LabelNoise&) const = default;
};

using AugStep = std::variant<Normalize, GaussianNoise, FeatureDropout, LabelNoise>;

struct AugmentationSpec {
  std::vector<AugStep> steps;
  std::uint64_t seed = 0;

  bool empty() const { return steps.empty(); }
  bool operator==(const AugmentationSpec&) const = default;
};

void validate(const AugmentationSpec& spec);

nlohmann::ordered_json to_json(const AugmentationSpec& spec);
AugmentationSpec augmentation_from_json(const nlohmann::json& j,
                                        const std::string& path = "/aug");

// Bit-reproducible for a fixed (spec, seed); throws InvalidArgument if the
// result contains a non-finite value.
Batch augment(const Batch& batch, const AugmentationSpec& spec, int num_classes,
              std::uint64_t seed);

// Named presets searched by the configuration explorer.
std::span<const std::string> augmentation_presets();
AugmentationSpec augmentation_preset(const std::string& name);

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation
};

FeatureStats compute_stats(const Batch& batch);

}  // namespace modelps::features
