#pragma once

// Feed-forward net w -> 8 sigmoid units -> 1 linear output.
// Flat parameter layout: W1 (hidden x w, row-major), b1 (hidden), w2 (hidden), b2.

#include <array>

#include "plcmon/forecasting/neural.hpp"

namespace plcmon {

class FfnnNet {
 public:
  static constexpr PredictorKind kind = PredictorKind::ffnn;
  static constexpr std::size_t kHidden = 8;

  explicit FfnnNet(std::size_t window = 96) : w_(window) {
    if (w_ == 0) throw std::invalid_argument("ffnn: window must be >= 1");
  }

  std::size_t window() const { return w_; }
  std::size_t size() const { return kHidden * w_ + 2 * kHidden + 1; }

  void init(std::span<double> p, std::mt19937_64& rng) const {
    const double a1 = std::sqrt(6.0 / static_cast<double>(w_ + kHidden));
    const double a2 = std::sqrt(6.0 / static_cast<double>(kHidden + 1));
    std::uniform_real_distribution<double> u1(-a1, a1);
    std::uniform_real_distribution<double> u2(-a2, a2);
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t k = 0; k < kHidden * w_; ++k) p[k] = u1(rng);
    for (std::size_t k = 0; k < kHidden; ++k) p[w2_off() + k] = u2(rng);
  }

  double forward(std::span<const double> p, std::span<const double> x) const {
    double y = p[b2_off()];
    for (std::size_t h = 0; h < kHidden; ++h) y += p[w2_off() + h] * hidden(p, x, h);
    return y;
  }

  /// Mean squared error over `rows` and, when `grad` is nonempty, its gradient.
  double loss_and_grad(std::span<const double> p, const Matrix& inputs, std::span<const double> targets,
                       std::span<const std::size_t> rows, std::span<double> grad) const {
    const bool want = !grad.empty();
    if (want) std::fill(grad.begin(), grad.end(), 0.0);
    std::array<double, kHidden> a{};
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t r : rows) {
      const auto x = inputs.row(r);
      double y = p[b2_off()];
      for (std::size_t h = 0; h < kHidden; ++h) {
        a[h] = hidden(p, x, h);
        y += p[w2_off() + h] * a[h];
      }
      const double e = y - targets[r];
      loss += e * e;
      if (!want) continue;
      const double dy = 2.0 * e * inv_n;
      grad[b2_off()] += dy;
      for (std::size_t h = 0; h < kHidden; ++h) {
        grad[w2_off() + h] += dy * a[h];
        const double dz = dy * p[w2_off() + h] * a[h] * (1.0 - a[h]);
        grad[b1_off() + h] += dz;
        double* gw = grad.data() + h * w_;
        for (std::size_t k = 0; k < w_; ++k) gw[k] += dz * x[k];
      }
    }
    return loss * inv_n;
  }

 private:
  std::size_t b1_off() const { return kHidden * w_; }
  std::size_t w2_off() const { return b1_off() + kHidden; }
  std::size_t b2_off() const { return w2_off() + kHidden; }

  double hidden(std::span<const double> p, std::span<const double> x, std::size_t h) const {
    const double* wr = p.data() + h * w_;
    double z = p[b1_off() + h];
    for (std::size_t k = 0; k < w_; ++k) z += wr[k] * x[k];
    return sigmoid(z);
  }

  std::size_t w_;
};

using FfnnPredictor = NeuralPredictor<FfnnNet>;

}  // namespace plcmon
