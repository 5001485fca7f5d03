#include "modelps/features/augmentation.h"

#include <cmath>
#include <numeric>
#include <random>
#include <type_traits>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::features {
namespace {

[[noreturn]] void bad_aug(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kInvalidArgument, "invalid augmentation " + path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

void check_prob(double p, const std::string& path) {
  if (!(p >= 0.0 && p <= 1.0)) bad_aug(path, "probability must lie in [0,1]");
}

}  // namespace

std::size_t Batch::feature_dim() const {
  std::size_t d = 1;
  for (auto s : feature_shape) d *= static_cast<std::size_t>(s);
  return d;
}

void validate(const AugmentationSpec& spec) {
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    const std::string path = "/aug/steps/" + std::to_string(i);
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Normalize>) {
            if (s.mean.empty() || s.std.empty()) bad_aug(path, "mean/std must be non-empty");
            for (double v : s.std) {
              if (!(v > 0.0)) bad_aug(path, "std must be positive");
            }
          } else if constexpr (std::is_same_v<T, GaussianNoise>) {
            if (!(s.sigma >= 0.0)) bad_aug(path, "sigma must be non-negative");
          } else {
            check_prob(s.p, path);
          }
        },
        spec.steps[i]);
  }
}

nlohmann::ordered_json to_json(const AugmentationSpec& spec) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& step : spec.steps) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Normalize>) {
            steps.push_back({{"op", "normalize"}, {"mean", s.mean}, {"std", s.std}});
          } else if constexpr (std::is_same_v<T, GaussianNoise>) {
            steps.push_back({{"op", "gaussian_noise"}, {"sigma", s.sigma}});
          } else if constexpr (std::is_same_v<T, FeatureDropout>) {
            steps.push_back({{"op", "feature_dropout"}, {"p", s.p}});
          } else {
            steps.push_back({{"op", "label_noise"}, {"p", s.p}});
          }
        },
        step);
  }
  return {{"steps", std::move(steps)}, {"seed", spec.seed}};
}

AugmentationSpec augmentation_from_json(const nlohmann::json& j, const std::string& path) {
  AugmentationSpec spec;
  if (j.is_array()) {
    return augmentation_from_json(nlohmann::json{{"steps", j}}, path);
  }
  if (!j.is_object()) bad_aug(path, "expected object");
  try {
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("steps")) {
      const auto& steps = j.at("steps");
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        const std::string op = s.at("op").get<std::string>();
        auto vec = [&](const char* key) {
          const auto& v = s.at(key);
          return v.is_array() ? v.get<std::vector<double>>()
                              : std::vector<double>{v.get<double>()};
        };
        if (op == "normalize") {
          spec.steps.push_back(Normalize{vec("mean"), vec("std")});
        } else if (op == "gaussian_noise") {
          spec.steps.push_back(GaussianNoise{s.at("sigma").get<double>()});
        } else if (op == "feature_dropout") {
          spec.steps.push_back(FeatureDropout{s.at("p").get<double>()});
        } else if (op == "label_noise") {
          spec.steps.push_back(LabelNoise{s.at("p").get<double>()});
        } else {
          bad_aug(path + "/steps/" + std::to_string(i) + "/op", "unknown op '" + op + "'");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    bad_aug(path, e.what());
  }
  validate(spec);
  return spec;
}

Batch augment(const Batch& batch, const AugmentationSpec& spec, int num_classes,
              std::uint64_t seed) {
  validate(spec);
  Batch out = batch;
  if (spec.steps.empty()) return out;
  const std::size_t d = out.dim();
  std::mt19937_64 rng(mix_seed({spec.seed, seed}));
  for (const auto& step : spec.steps) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Normalize>) {
            auto at = [](const std::vector<double>& v, std::size_t j) {
              return v.size() == 1 ? v[0] : v[j];
            };
            if ((s.mean.size() != 1 && s.mean.size() != d) ||
                (s.std.size() != 1 && s.std.size() != d)) {
              throw Error(ErrorCode::kShapeInconsistent,
                          "normalize mean/std length must be 1 or " + std::to_string(d));
            }
            for (std::size_t i = 0; i < out.n; ++i) {
              for (std::size_t j = 0; j < d; ++j) {
                double& x = out.features[i * d + j];
                x = (x - at(s.mean, j)) / at(s.std, j);
              }
            }
          } else if constexpr (std::is_same_v<T, GaussianNoise>) {
            std::normal_distribution<double> noise(0.0, 1.0);
            for (double& x : out.features) x += s.sigma * noise(rng);
          } else if constexpr (std::is_same_v<T, FeatureDropout>) {
            std::bernoulli_distribution drop(s.p);
            for (double& x : out.features) {
              if (drop(rng)) x = 0.0;
            }
          } else {
            std::bernoulli_distribution flip(s.p);
            std::uniform_int_distribution<int> other(0, std::max(0, num_classes - 2));
            for (int& y : out.labels) {
              if (flip(rng) && num_classes > 1) {
                int c = other(rng);
                y = c >= y ? c + 1 : c;
              }
            }
          }
        },
        step);
  }
  for (double x : out.features) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument, "augmentation produced a non-finite value");
    }
  }
  return out;
}

std::span<const std::string> augmentation_presets() {
  static const std::vector<std::string> kPresets = {
      "none",        "noise-0.01",  "noise-0.02",  "noise-0.05", "noise-0.1",
      "noise-0.2",   "dropout-0.05", "dropout-0.1", "dropout-0.2", "noise-0.05+dropout-0.05"};
  return kPresets;
}

AugmentationSpec augmentation_preset(const std::string& name) {
  AugmentationSpec spec;
  auto parse_part = [&](const std::string& part) {
    if (part == "none") return;
    auto dash = part.rfind('-');
    if (dash == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "unknown augmentation preset '" + name + "'");
    }
    const std::string op = part.substr(0, dash);
    const double v = std::stod(part.substr(dash + 1));
    if (op == "noise") {
      spec.steps.push_back(GaussianNoise{v});
    } else if (op == "dropout") {
      spec.steps.push_back(FeatureDropout{v});
    } else if (op == "labelnoise") {
      spec.steps.push_back(LabelNoise{v});
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown augmentation preset '" + name + "'");
    }
  };
  std::size_t start = 0;
  while (start <= name.size()) {
    auto plus = name.find('+', start);
    parse_part(name.substr(start, plus == std::string::npos ? std::string::npos : plus - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return spec;
}

FeatureStats compute_stats(const Batch& batch) {
  const std::size_t d = batch.dim();
  FeatureStats st{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  if (batch.n == 0) return st;
  for (std::size_t i = 0; i < batch.n; ++i) {
    for (std::size_t j = 0; j < d; ++j) st.mean[j] += batch.features[i * d + j];
  }
  for (double& m : st.mean) m /= static_cast<double>(batch.n);
  for (std::size_t i = 0; i < batch.n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double c = batch.features[i * d + j] - st.mean[j];
      st.std[j] += c * c;
    }
  }
  for (double& s : st.std) s = std::sqrt(s / static_cast<double>(batch.n));
  return st;
}

}  // namespace modelps::features
