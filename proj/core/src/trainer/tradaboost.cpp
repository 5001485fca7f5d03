#include "modelps/trainer/tradaboost.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "modelps/error.h"
#include "modelps/trainer/losses.h"
#include "modelps/util.h"

namespace modelps::trainer {

std::vector<int> Ensemble::predict(std::span<const double> x, std::size_t n) const {
  if (learners.empty()) throw Error(ErrorCode::kInternal, "empty ensemble");
  const std::size_t c = learners.front().output_dim();
  std::vector<double> score(n * c, 0.0);
  for (std::size_t l = 0; l < learners.size(); ++l) {
    auto p = learners[l].predict(x, n);
    for (std::size_t i = 0; i < n; ++i) score[i * c + p[i]] += votes[l];
  }
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = score.data() + i * c;
    out[i] = static_cast<int>(std::max_element(row, row + c) - row);
  }
  return out;
}

double Ensemble::accuracy(const features::Batch& batch) const {
  if (batch.n == 0) return 0.0;
  auto p = predict(batch.features, batch.n);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < batch.n; ++i) hit += p[i] == batch.labels[i];
  return static_cast<double>(hit) / static_cast<double>(batch.n);
}

std::int64_t Ensemble::param_count() const {
  std::int64_t total = 0;
  for (const auto& l : learners) total += l.param_count();
  return total;
}

const Network& Ensemble::strongest() const {
  if (learners.empty()) throw Error(ErrorCode::kInternal, "empty ensemble");
  auto it = std::max_element(votes.begin(), votes.end());
  return learners[static_cast<std::size_t>(it - votes.begin())];
}

Tradaboost::Tradaboost(features::Batch source, features::Batch target, int num_classes,
                       Network init, TrainConfig config)
    : source_(std::move(source)),
      target_(std::move(target)),
      num_classes_(num_classes),
      init_(std::move(init)),
      config_(std::move(config)) {
  if (source_.feature_dim() != target_.feature_dim()) {
    throw Error(ErrorCode::kIncompatibleDatasets, "source and target feature shapes differ",
                {{"source_dim", source_.feature_dim()}, {"target_dim", target_.feature_dim()}});
  }
  if (source_.n == 0 || target_.n == 0) {
    throw Error(ErrorCode::kEmptySplit, "tradaboost needs non-empty source and target sets");
  }
  const double n_src = static_cast<double>(source_.n);
  beta_ = 1.0 / (1.0 + std::sqrt(2.0 * std::log(n_src) / config_.boosting_rounds));
  source_w_.assign(source_.n, 1.0);
  target_w_.assign(target_.n, 1.0);
}

Tradaboost::StepOutcome Tradaboost::step(const std::function<bool()>& should_abort) {
  if (done_) return StepOutcome::kStopped;
  const auto round = static_cast<std::uint64_t>(rounds_.size());
  const std::size_t ns = source_.n, nt = target_.n, n = ns + nt;

  // Normalized instance weights with mean 1 over the union.
  const double wsum = std::accumulate(source_w_.begin(), source_w_.end(), 0.0) +
                      std::accumulate(target_w_.begin(), target_w_.end(), 0.0);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < ns; ++i) w[i] = source_w_[i] * n / wsum;
  for (std::size_t i = 0; i < nt; ++i) w[ns + i] = target_w_[i] * n / wsum;
  auto row = [&](std::size_t i) {
    return i < ns ? source_.row(i) : target_.row(i - ns);
  };
  auto label = [&](std::size_t i) { return i < ns ? source_.labels[i] : target_.labels[i - ns]; };

  Network learner = init_;
  OptimizerState opt = learner.zero_state();
  const std::size_t bs = static_cast<std::size_t>(config_.batch_size);
  for (int e = 0; e < config_.epochs; ++e) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(mix_seed({config_.seed, round, static_cast<std::uint64_t>(e), 0xB005ULL}));
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t b = 0, start = 0; start < n; ++b, start += bs) {
      if (should_abort && should_abort()) return StepOutcome::kAborted;
      const std::size_t m = std::min(bs, n - start);
      features::Batch batch;
      batch.feature_shape = source_.feature_shape;
      batch.n = m;
      std::vector<double> bw(m);
      for (std::size_t k = 0; k < m; ++k) {
        auto r = row(perm[start + k]);
        batch.features.insert(batch.features.end(), r.begin(), r.end());
        batch.labels.push_back(label(perm[start + k]));
        bw[k] = w[perm[start + k]];
      }
      const std::uint64_t s = mix_seed({config_.seed, round, static_cast<std::uint64_t>(e), b});
      if (!config_.aug.empty()) batch = features::augment(batch, config_.aug, num_classes_, s);
      auto cache = learner.forward(batch.features, m, true, mix_seed({s, 0xD20ULL}));
      auto lg = cross_entropy(Network::logits(cache), m, learner.output_dim(), batch.labels, bw);
      const double scale = std::accumulate(bw.begin(), bw.end(), 0.0) / static_cast<double>(m);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss, "non-finite loss in boosting round",
                    {{"round", round}, {"epoch", e}});
      }
      for (double& g : lg.grad) g *= scale;
      auto grads = learner.backward(cache, lg.grad);
      sgd_update(learner, opt, grads, config_.lr, config_.momentum);
    }
  }

  auto ps = learner.predict(source_.features, ns);
  auto pt = learner.predict(target_.features, nt);
  BoostRound r;
  double err_w = 0.0, tw = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const bool err = pt[i] != target_.labels[i];
    r.target_errors += err;
    err_w += err ? target_w_[i] : 0.0;
    tw += target_w_[i];
  }
  for (std::size_t i = 0; i < ns; ++i) r.source_errors += ps[i] != source_.labels[i];
  r.epsilon = err_w / tw;

  if (r.epsilon >= 0.5) {
    // Too weak to boost; keep it only if nothing else exists.
    r.beta_t = r.epsilon < 1.0 ? r.epsilon / (1.0 - r.epsilon) : INFINITY;
    r.accepted = learners_.empty();
    r.vote = r.accepted ? 1.0 : 0.0;
    if (r.accepted) learners_.push_back(std::move(learner));
    rounds_.push_back(r);
    done_ = true;
    return StepOutcome::kStopped;
  }
  if (r.epsilon == 0.0) {
    constexpr double kEps = 1e-10;
    r.beta_t = kEps / (1.0 - kEps);
    r.vote = std::log(1.0 / r.beta_t);
    r.accepted = true;
    learners_.push_back(std::move(learner));
    rounds_.push_back(r);
    done_ = true;
    return StepOutcome::kStopped;
  }
  r.beta_t = r.epsilon / (1.0 - r.epsilon);
  r.vote = std::log(1.0 / r.beta_t);
  r.accepted = true;
  for (std::size_t i = 0; i < ns; ++i) {
    if (ps[i] != source_.labels[i]) source_w_[i] *= beta_;
  }
  for (std::size_t i = 0; i < nt; ++i) {
    if (pt[i] != target_.labels[i]) target_w_[i] /= r.beta_t;
  }
  learners_.push_back(std::move(learner));
  rounds_.push_back(r);
  if (static_cast<int>(rounds_.size()) >= config_.boosting_rounds) done_ = true;
  return done_ ? StepOutcome::kStopped : StepOutcome::kContinue;
}

Ensemble Tradaboost::ensemble() const {
  Ensemble e;
  std::vector<double> votes;
  for (const auto& r : rounds_) {
    if (r.accepted) votes.push_back(r.vote);
  }
  const std::size_t n = learners_.size();
  const std::size_t keep = (n + 1) / 2;
  for (std::size_t i = n - keep; i < n; ++i) {
    e.learners.push_back(learners_[i]);
    e.votes.push_back(votes[i]);
  }
  return e;
}

Tradaboost::State Tradaboost::state() const {
  return {source_w_, target_w_, rounds_, learners_, done_};
}

void Tradaboost::set_state(State s) {
  if (s.source_w.size() != source_.n || s.target_w.size() != target_.n) {
    throw Error(ErrorCode::kStoreCorrupt, "boosting checkpoint does not match datasets");
  }
  source_w_ = std::move(s.source_w);
  target_w_ = std::move(s.target_w);
  rounds_ = std::move(s.rounds);
  learners_ = std::move(s.learners);
  done_ = s.done;
}

}  // namespace modelps::trainer
