#include "modelps/trainer/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "modelps/error.h"

namespace modelps::trainer {

namespace {

// log-softmax of one row scaled by 1/t.
void log_softmax(const double* z, std::size_t c, double t, double* out) {
  double mx = z[0] / t;
  for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, z[k] / t);
  double sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) sum += std::exp(z[k] / t - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t k = 0; k < c; ++k) out[k] = z[k] / t - lse;
}

void check_labels(std::span<const int> labels, std::size_t n, std::size_t classes) {
  if (labels.size() != n) throw Error(ErrorCode::kDimMismatch, "label count mismatch");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y) + " out of range");
    }
  }
}

}  // namespace

LossGrad cross_entropy(std::span<const double> logits, std::size_t n, std::size_t classes,
                       std::span<const int> labels, std::span<const double> weights) {
  check_labels(labels, n, classes);
  LossGrad r;
  r.grad.assign(n * classes, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) wsum += weights.empty() ? 1.0 : weights[i];
  if (n == 0 || wsum <= 0.0) return r;
  std::vector<double> lp(classes);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (weights.empty() ? 1.0 : weights[i]) / wsum;
    log_softmax(logits.data() + i * classes, classes, 1.0, lp.data());
    r.loss -= w * lp[labels[i]];
    double* g = r.grad.data() + i * classes;
    for (std::size_t k = 0; k < classes; ++k) g[k] = w * std::exp(lp[k]);
    g[labels[i]] -= w;
  }
  return r;
}

LossGrad kd_loss(std::span<const double> student, std::span<const double> teacher,
                 std::size_t n, std::size_t classes, std::span<const int> labels,
                 double temperature, double alpha) {
  check_labels(labels, n, classes);
  const double t = temperature;
  LossGrad r;
  r.grad.assign(n * classes, 0.0);
  if (n == 0) return r;
  std::vector<double> lp(classes), lps(classes), lpt(classes);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* s = student.data() + i * classes;
    const double* te = teacher.data() + i * classes;
    log_softmax(s, classes, 1.0, lp.data());
    log_softmax(s, classes, t, lps.data());
    log_softmax(te, classes, t, lpt.data());
    double kl = 0.0;
    for (std::size_t k = 0; k < classes; ++k) kl += std::exp(lpt[k]) * (lpt[k] - lps[k]);
    r.loss += inv_n * (alpha * -lp[labels[i]] + (1.0 - alpha) * t * t * kl);
    double* g = r.grad.data() + i * classes;
    for (std::size_t k = 0; k < classes; ++k) {
      const double hard = std::exp(lp[k]) - (static_cast<int>(k) == labels[i] ? 1.0 : 0.0);
      const double soft = std::exp(lps[k]) - std::exp(lpt[k]);
      g[k] = inv_n * (alpha * hard + (1.0 - alpha) * t * soft);
    }
  }
  return r;
}

MmdResult mmd(std::span<const double> a, std::size_t na, std::size_t dim_a,
              std::span<const double> b, std::size_t nb, std::size_t dim_b,
              const Kernel& kernel, bool with_grad) {
  if (dim_a != dim_b) {
    throw Error(ErrorCode::kDimMismatch,
                "feature dims differ: " + std::to_string(dim_a) + " vs " + std::to_string(dim_b),
                {{"dim_a", dim_a}, {"dim_b", dim_b}});
  }
  if (na == 0 || nb == 0) throw Error(ErrorCode::kInvalidArgument, "mmd needs non-empty sets");
  const std::size_t d = dim_a;
  MmdResult r;
  if (with_grad) {
    r.grad_a.assign(na * d, 0.0);
    r.grad_b.assign(nb * d, 0.0);
  }
  const double fa = 1.0 / static_cast<double>(na);
  const double fb = 1.0 / static_cast<double>(nb);

  if (kernel.kind == Kernel::Kind::kLinear) {
    // |mean(a) - mean(b)|^2
    std::vector<double> diff(d, 0.0);
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t k = 0; k < d; ++k) diff[k] += fa * a[i * d + k];
    std::vector<double> mb(d, 0.0);
    for (std::size_t j = 0; j < nb; ++j)
      for (std::size_t k = 0; k < d; ++k) mb[k] += fb * b[j * d + k];
    for (std::size_t k = 0; k < d; ++k) diff[k] -= mb[k];
    for (double v : diff) r.value += v * v;
    if (with_grad) {
      for (std::size_t i = 0; i < na; ++i)
        for (std::size_t k = 0; k < d; ++k) r.grad_a[i * d + k] = 2.0 * fa * diff[k];
      for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t k = 0; k < d; ++k) r.grad_b[j * d + k] = -2.0 * fb * diff[k];
    }
    return r;
  }

  const double gamma = kernel.gamma;
  auto k_and_grad = [&](const double* x, const double* y, double* gx, double* gy, double scale) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += (x[k] - y[k]) * (x[k] - y[k]);
    const double kv = std::exp(-gamma * sq);
    if (gx || gy) {
      // d k / d x = -2 gamma (x - y) k
      const double c = -2.0 * gamma * kv * scale;
      for (std::size_t k = 0; k < d; ++k) {
        const double g = c * (x[k] - y[k]);
        if (gx) gx[k] += g;
        if (gy) gy[k] -= g;
      }
    }
    return kv;
  };
  double kaa = 0.0, kbb = 0.0, kab = 0.0;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j)
      kaa += k_and_grad(&a[i * d], &a[j * d], with_grad ? &r.grad_a[i * d] : nullptr,
                        with_grad ? &r.grad_a[j * d] : nullptr, fa * fa);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      kbb += k_and_grad(&b[i * d], &b[j * d], with_grad ? &r.grad_b[i * d] : nullptr,
                        with_grad ? &r.grad_b[j * d] : nullptr, fb * fb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      kab += k_and_grad(&a[i * d], &b[j * d], with_grad ? &r.grad_a[i * d] : nullptr,
                        with_grad ? &r.grad_b[j * d] : nullptr, -2.0 * fa * fb);
  r.value = std::max(0.0, fa * fa * kaa + fb * fb * kbb - 2.0 * fa * fb * kab);
  return r;
}

}  // namespace modelps::trainer
