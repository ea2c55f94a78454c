#pragma once

// Single 8-unit LSTM cell reading the window as a scalar sequence; the final
// hidden state maps linearly to the forecast.
//   i, f, o = sigmoid(.), g = tanh(.), c_t = f c_{t-1} + i g, h_t = o tanh(c_t)
// Gate blocks are ordered (i, f, g, o). Flat parameter layout:
//   Wx (4H), Wh (4H x H, row-major), b (4H), v (H), c.

#include <array>

#include "plcmon/forecasting/neural.hpp"

namespace plcmon {

class LstmNet {
 public:
  static constexpr PredictorKind kind = PredictorKind::lstm;
  static constexpr std::size_t kHidden = 8;
  static constexpr std::size_t kGates = 4 * kHidden;

  explicit LstmNet(std::size_t window = 96) : w_(window) {
    if (w_ == 0) throw std::invalid_argument("lstm: window must be >= 1");
  }

  std::size_t window() const { return w_; }
  std::size_t size() const { return kGates + kGates * kHidden + kGates + kHidden + 1; }

  void init(std::span<double> p, std::mt19937_64& rng) const {
    const double ax = std::sqrt(6.0 / static_cast<double>(1 + kHidden));
    const double ah = std::sqrt(6.0 / static_cast<double>(2 * kHidden));
    const double av = std::sqrt(6.0 / static_cast<double>(kHidden + 1));
    std::uniform_real_distribution<double> ux(-ax, ax);
    std::uniform_real_distribution<double> uh(-ah, ah);
    std::uniform_real_distribution<double> uv(-av, av);
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t k = 0; k < kGates; ++k) p[wx_off() + k] = ux(rng);
    for (std::size_t k = 0; k < kGates * kHidden; ++k) p[wh_off() + k] = uh(rng);
    for (std::size_t k = 0; k < kHidden; ++k) p[b_off() + kHidden + k] = 1.0;  // forget gate
    for (std::size_t k = 0; k < kHidden; ++k) p[v_off() + k] = uv(rng);
  }

  double forward(std::span<const double> p, std::span<const double> x) const {
    std::array<double, kHidden> h{};
    std::array<double, kHidden> c{};
    std::array<double, kGates> z{};
    for (double xt : x) {
      gates(p, xt, h, z);
      for (std::size_t u = 0; u < kHidden; ++u) {
        const double i = sigmoid(z[u]);
        const double f = sigmoid(z[kHidden + u]);
        const double g = std::tanh(z[2 * kHidden + u]);
        const double o = sigmoid(z[3 * kHidden + u]);
        c[u] = f * c[u] + i * g;
        h[u] = o * std::tanh(c[u]);
      }
    }
    double y = p[c_off()];
    for (std::size_t u = 0; u < kHidden; ++u) y += p[v_off() + u] * h[u];
    return y;
  }

  /// Mean squared error over `rows` and, when `grad` is nonempty, its gradient (full BPTT).
  double loss_and_grad(std::span<const double> p, const Matrix& inputs, std::span<const double> targets,
                       std::span<const std::size_t> rows, std::span<double> grad) const {
    const bool want = !grad.empty();
    if (want) std::fill(grad.begin(), grad.end(), 0.0);
    // Per step: activated gates (i, f, g, o), cell state, hidden state.
    std::vector<std::array<double, kGates>> act(w_);
    std::vector<std::array<double, kHidden>> cs(w_ + 1);
    std::vector<std::array<double, kHidden>> hs(w_ + 1);
    std::array<double, kGates> z{};
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t r : rows) {
      const auto x = inputs.row(r);
      cs[0].fill(0.0);
      hs[0].fill(0.0);
      for (std::size_t t = 0; t < w_; ++t) {
        gates(p, x[t], hs[t], z);
        auto& a = act[t];
        for (std::size_t u = 0; u < kHidden; ++u) {
          a[u] = sigmoid(z[u]);
          a[kHidden + u] = sigmoid(z[kHidden + u]);
          a[2 * kHidden + u] = std::tanh(z[2 * kHidden + u]);
          a[3 * kHidden + u] = sigmoid(z[3 * kHidden + u]);
          cs[t + 1][u] = a[kHidden + u] * cs[t][u] + a[u] * a[2 * kHidden + u];
          hs[t + 1][u] = a[3 * kHidden + u] * std::tanh(cs[t + 1][u]);
        }
      }
      double y = p[c_off()];
      for (std::size_t u = 0; u < kHidden; ++u) y += p[v_off() + u] * hs[w_][u];
      const double e = y - targets[r];
      loss += e * e;
      if (!want) continue;

      const double dy = 2.0 * e * inv_n;
      grad[c_off()] += dy;
      std::array<double, kHidden> dh{};
      std::array<double, kHidden> dc{};
      for (std::size_t u = 0; u < kHidden; ++u) {
        grad[v_off() + u] += dy * hs[w_][u];
        dh[u] = dy * p[v_off() + u];
      }
      std::array<double, kGates> dz{};
      for (std::size_t t = w_; t-- > 0;) {
        const auto& a = act[t];
        for (std::size_t u = 0; u < kHidden; ++u) {
          const double i = a[u];
          const double f = a[kHidden + u];
          const double g = a[2 * kHidden + u];
          const double o = a[3 * kHidden + u];
          const double tc = std::tanh(cs[t + 1][u]);
          const double dct = dc[u] + dh[u] * o * (1.0 - tc * tc);
          dz[u] = dct * g * i * (1.0 - i);
          dz[kHidden + u] = dct * cs[t][u] * f * (1.0 - f);
          dz[2 * kHidden + u] = dct * i * (1.0 - g * g);
          dz[3 * kHidden + u] = dh[u] * tc * o * (1.0 - o);
          dc[u] = dct * f;
        }
        const auto& hp = hs[t];
        dh.fill(0.0);
        for (std::size_t k = 0; k < kGates; ++k) {
          const double d = dz[k];
          grad[wx_off() + k] += d * x[t];
          grad[b_off() + k] += d;
          const double* whr = p.data() + wh_off() + k * kHidden;
          double* gwh = grad.data() + wh_off() + k * kHidden;
          for (std::size_t u = 0; u < kHidden; ++u) {
            gwh[u] += d * hp[u];
            dh[u] += whr[u] * d;
          }
        }
      }
    }
    return loss * inv_n;
  }

 private:
  static constexpr std::size_t wx_off() { return 0; }
  static constexpr std::size_t wh_off() { return kGates; }
  static constexpr std::size_t b_off() { return wh_off() + kGates * kHidden; }
  static constexpr std::size_t v_off() { return b_off() + kGates; }
  static constexpr std::size_t c_off() { return v_off() + kHidden; }

  static void gates(std::span<const double> p, double xt, const std::array<double, kHidden>& h,
                    std::array<double, kGates>& z) {
    for (std::size_t k = 0; k < kGates; ++k) {
      const double* whr = p.data() + wh_off() + k * kHidden;
      double s = p[b_off() + k] + p[wx_off() + k] * xt;
      for (std::size_t u = 0; u < kHidden; ++u) s += whr[u] * h[u];
      z[k] = s;
    }
  }

  std::size_t w_;
};

using LstmPredictor = NeuralPredictor<LstmNet>;

}  // namespace plcmon
