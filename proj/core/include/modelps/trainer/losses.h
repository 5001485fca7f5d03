#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace modelps::trainer {

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits, same layout as the input
};

// Softmax cross-entropy, averaged over samples. With `weights` the result is
// sum_i w_i * CE_i / sum_i w_i.
LossGrad cross_entropy(std::span<const double> logits, std::size_t n, std::size_t classes,
                       std::span<const int> labels, std::span<const double> weights = {});

// alpha * CE(student, y) + (1 - alpha) * T^2 * KL(softmax(t/T) || softmax(s/T)),
// averaged over samples.
LossGrad kd_loss(std::span<const double> student, std::span<const double> teacher,
                 std::size_t n, std::size_t classes, std::span<const int> labels,
                 double temperature, double alpha);

struct Kernel {
  enum class Kind { kLinear, kRbf };
  Kind kind = Kind::kLinear;
  double gamma = 1.0;  // rbf: exp(-gamma * |x - y|^2)

  static Kernel linear() { return {}; }
  static Kernel rbf(double gamma) { return {Kind::kRbf, gamma}; }
};

struct MmdResult {
  double value = 0.0;
  std::vector<double> grad_a;
  std::vector<double> grad_b;
};

// Biased squared MMD between row sets a (na x dim_a) and b (nb x dim_b).
// Throws DimMismatch when dim_a != dim_b.
MmdResult mmd(std::span<const double> a, std::size_t na, std::size_t dim_a,
              std::span<const double> b, std::size_t nb, std::size_t dim_b,
              const Kernel& kernel, bool with_grad = false);

}  // namespace modelps::trainer
