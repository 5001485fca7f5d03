#include "modelps/genie/explore.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "modelps/error.h"
#include "modelps/trainer/validator.h"
#include "modelps/util.h"

namespace modelps::genie {

nlohmann::ordered_json to_json(const SearchSpace& s) {
  nlohmann::ordered_json j;
  j["base_model_id"] = s.base_models;
  j["dataset_id"] = s.datasets;
  j["aug_preset"] = s.aug_presets;
  j["tl_method"] = {trainer::to_string(s.tl_method)};
  j["lr"] = {{"scale", "log-uniform"}, {"min", s.lr_min}, {"max", s.lr_max}};
  nlohmann::ordered_json k = nlohmann::ordered_json::object();
  for (const auto& [m, v] : s.k_max) k[m] = {{"min", 0}, {"max", v}};
  j["frozen_layers"] = k;
  j["epochs"] = {{"min", s.epochs_min}, {"max", s.epochs_max}};
  return j;
}

trainer::ValidationReport TrainerEvaluator::evaluate(const trainer::TrainConfig& c) const {
  return trainer::validate(ctx_, c, budget_s_,
                           [this](const trainer::TrainConfig& cfg, const graph::ModelGraph& g) {
                             return sim_.evaluate(cfg, g);
                           });
}

std::vector<std::size_t> halving_schedule(std::size_t n) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  std::size_t p = 1;
  for (;;) {
    const std::size_t alive = (n + p - 1) / p;
    out.push_back(alive);
    if (alive == 1) break;
    p *= 3;
  }
  return out;
}

int rung_epochs(int full, std::size_t rung, std::size_t rungs) {
  const double scale = std::pow(3.0, static_cast<double>(rungs - 1 - rung));
  return std::max(1, static_cast<int>(std::lround(full / scale)));
}

std::vector<trainer::TrainConfig> sample_configs(const SearchSpace& s,
                                                 const trainer::TrainConfig& base, std::size_t n,
                                                 std::uint64_t seed) {
  if (s.base_models.empty()) {
    throw Error(ErrorCode::kNoCandidateModels, "search space has no base models");
  }
  std::mt19937_64 rng(mix_seed({seed, 0xE5A1ULL}));
  std::vector<trainer::TrainConfig> out;
  out.reserve(n);
  const double lo = std::log10(s.lr_min), hi = std::log10(s.lr_max);
  for (std::size_t i = 0; i < n; ++i) {
    trainer::TrainConfig c = base;
    c.tl_method = s.tl_method;
    c.base_model_id =
        s.base_models[std::uniform_int_distribution<std::size_t>(0, s.base_models.size() - 1)(rng)];
    c.lr = std::pow(10.0, std::uniform_real_distribution<double>(lo, hi)(rng));
    auto km = s.k_max.find(c.base_model_id);
    const int kmax = km == s.k_max.end() ? 0 : km->second;
    c.frozen_layers = std::uniform_int_distribution<int>(0, kmax)(rng);
    c.epochs = std::uniform_int_distribution<int>(s.epochs_min, s.epochs_max)(rng);
    if (!s.aug_presets.empty()) {
      const auto& preset =
          s.aug_presets[std::uniform_int_distribution<std::size_t>(0, s.aug_presets.size() - 1)(rng)];
      c.aug = features::augmentation_preset(preset);
      c.aug_preset = preset;
    }
    const bool needs_source = c.tl_method == trainer::TlMethod::kTradaboost ||
                              c.tl_method == trainer::TlMethod::kMmdAdapt;
    if (needs_source && s.datasets.size() > 1) {
      c.source_dataset_id =
          s.datasets[std::uniform_int_distribution<std::size_t>(1, s.datasets.size() - 1)(rng)];
    }
    c.seed = mix_seed({seed, i});
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

double primary_score(const Target& t, const trainer::ValidationReport& r) {
  const double v = metric_value(r, t.metric);
  return t.direction == Direction::kMaximize ? v : -v;
}

}  // namespace

ExploreResult explore(const GenieRequest& request, const SearchSpace& space,
                      const Evaluator& evaluator, int budget, const ExploreOptions& opt) {
  if (budget < 1) throw Error(ErrorCode::kInvalidArgument, "explore budget must be >= 1");
  if (request.targets.empty()) throw Error(ErrorCode::kInvalidArgument, "request has no targets");
  trainer::TrainConfig base;
  base.dataset_id = request.dataset_id;
  const auto configs = sample_configs(space, base, static_cast<std::size_t>(budget), request.seed);
  const auto schedule = halving_schedule(configs.size());
  const Target primary = request.targets.front();

  ExploreResult result;
  std::vector<std::size_t> alive(configs.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

  for (std::size_t rung = 0; rung < schedule.size(); ++rung) {
    alive.resize(std::min(alive.size(), schedule[rung]));
    result.rung_sizes.push_back(alive.size());
    std::vector<Trial> trials(alive.size());
    for (std::size_t t = 0; t < alive.size(); ++t) {
      trials[t].index = alive[t];
      trials[t].rung = static_cast<int>(rung);
      trials[t].config = configs[alive[t]];
      trials[t].config.epochs = rung_epochs(configs[alive[t]].epochs, rung, schedule.size());
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t t; (t = next.fetch_add(1)) < trials.size();) {
        try {
          trials[t].report = evaluator.evaluate(trials[t].config);
        } catch (const std::exception& e) {
          trials[t].error = e.what();
        }
      }
    };
    const int w = std::max(1, std::min<int>(opt.workers, static_cast<int>(trials.size())));
    if (w == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < w; ++i) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }

    for (const auto& t : trials) {
      if (!t.report) continue;
      auto rec = make_record(t.config, *t.report, opt.task, now_ms(), opt.record_source,
                             opt.record_method);
      if (opt.history) opt.history->append(rec);
      result.records.push_back(std::move(rec));
    }

    // Promote by primary target; failed trials drop out.
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      if (trials[t].report) order.push_back(t);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return primary_score(primary, *trials[a].report) > primary_score(primary, *trials[b].report);
    });
    std::vector<std::size_t> next_alive;
    for (auto t : order) next_alive.push_back(trials[t].index);
    for (auto& t : trials) result.trials.push_back(std::move(t));
    alive = std::move(next_alive);
    if (alive.empty()) break;
  }
  return result;
}

}  // namespace modelps::genie
