#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "modelps/error.h"
#include "modelps/features/feature_store.h"
#include "modelps/util.h"

namespace modelps::features {
namespace {

[[noreturn]] void bad_spec(const std::string& reason) {
  throw Error(ErrorCode::kInvalidArgument, "invalid generator spec: " + reason,
              {{"path", "/generator"}, {"reason", reason}});
}

template <typename T>
T param(const nlohmann::json& params, const char* key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_spec(std::string("parameter '") + key + "' has the wrong type");
  }
}

template <typename T>
T required(const nlohmann::json& params, const char* key) {
  if (!params.contains(key)) bad_spec(std::string("missing parameter '") + key + "'");
  return param<T>(params, key, T{});
}

GeneratedData blobs(const GeneratorSpec& spec, double shift) {
  const auto& p = spec.params;
  const int k = required<int>(p, "k");
  const int d = required<int>(p, "d");
  const int n = required<int>(p, "n");
  if (k < 2 || d < 1 || n < 1) bad_spec("need k >= 2, d >= 1, n >= 1");
  const double spread = param<double>(p, "spread", 1.0);
  const double separation = param<double>(p, "separation", 4.0);
  const std::uint64_t center_seed = param<std::uint64_t>(p, "center_seed", spec.seed);

  std::mt19937_64 center_rng(mix_seed({center_seed, 0xC3A7E5ULL}));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> centers(static_cast<std::size_t>(k * d));
  for (double& c : centers) c = separation * unit(center_rng);

  GeneratedData out;
  out.num_classes = k;
  out.feature_shape = param<std::vector<std::int64_t>>(p, "feature_shape", {d});
  std::int64_t prod = 1;
  for (auto s : out.feature_shape) prod *= s;
  if (prod != d) bad_spec("feature_shape does not match d");
  out.samples.feature_shape = out.feature_shape;
  out.samples.n = static_cast<std::size_t>(n);
  out.samples.features.resize(static_cast<std::size_t>(n) * d);
  out.samples.labels.resize(static_cast<std::size_t>(n));
  // Covariate shift: every point moves by shift*spread along the unit
  // all-ones direction.
  const double offset = shift * spread / std::sqrt(static_cast<double>(d));
  std::mt19937_64 rng(mix_seed({spec.seed, 0xB10B5ULL}));
  for (int i = 0; i < n; ++i) {
    const int y = i % k;
    out.samples.labels[i] = y;
    for (int j = 0; j < d; ++j) {
      out.samples.features[static_cast<std::size_t>(i) * d + j] =
          centers[static_cast<std::size_t>(y) * d + j] + spread * unit(rng) + offset;
    }
  }
  return out;
}

GeneratedData two_moons(const GeneratorSpec& spec) {
  const int n = required<int>(spec.params, "n");
  const double noise = param<double>(spec.params, "noise", 0.1);
  if (n < 2) bad_spec("need n >= 2");
  GeneratedData out;
  out.num_classes = 2;
  out.feature_shape = {2};
  out.samples.feature_shape = {2};
  out.samples.n = static_cast<std::size_t>(n);
  std::mt19937_64 rng(mix_seed({spec.seed, 0x300C5ULL}));
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, noise);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    const double t = angle(rng);
    double x0 = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double x1 = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
    out.samples.features.push_back(x0 + jitter(rng));
    out.samples.features.push_back(x1 + jitter(rng));
    out.samples.labels.push_back(y);
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const GeneratorSpec& spec) {
  return {{"kind", spec.kind}, {"params", spec.params}, {"seed", spec.seed}};
}

GeneratorSpec generator_from_json(const nlohmann::json& j) {
  GeneratorSpec spec;
  try {
    spec.kind = j.at("kind").get<std::string>();
    spec.params = j.value("params", nlohmann::json::object());
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    bad_spec(e.what());
  }
  return spec;
}

GeneratedData generate(const GeneratorSpec& spec) {
  if (spec.kind == "gaussian_blobs") return blobs(spec, 0.0);
  if (spec.kind == "shifted_blobs") return blobs(spec, param<double>(spec.params, "shift", 2.0));
  if (spec.kind == "two_moons") return two_moons(spec);
  bad_spec("unknown generator kind '" + spec.kind + "'");
}

Batch load_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file_text(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kShapeInconsistent, "empty CSV " + path.string());
  }
  auto split_line = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split_line(line);
  std::ptrdiff_t label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "label") label_col = static_cast<std::ptrdiff_t>(i);
  }
  if (label_col < 0) {
    throw Error(ErrorCode::kShapeInconsistent, "CSV lacks a 'label' column",
                {{"path", path.string()}});
  }
  Batch b;
  const std::size_t d = header.size() - 1;
  b.feature_shape = {static_cast<std::int64_t>(d)};
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kShapeInconsistent,
                  "CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()),
                  {{"row", row}});
    }
    try {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == label_col) {
          b.labels.push_back(std::stoi(cells[i]));
        } else {
          b.features.push_back(std::stod(cells[i]));
        }
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::kShapeInconsistent,
                  "CSV row " + std::to_string(row) + " has a non-numeric cell", {{"row", row}});
    }
    ++b.n;
  }
  return b;
}

double tag_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  std::vector<std::string> uni = a;
  for (const auto& t : b) {
    if (std::find(a.begin(), a.end(), t) != a.end()) {
      ++inter;
    } else {
      uni.push_back(t);
    }
  }
  return static_cast<double>(inter) / static_cast<double>(uni.size());
}

}  // namespace modelps::features
