#pragma once

// L2 boosting with depth-1 regression stumps over the w window coordinates.
// F_0 is the label mean; each stage fits a stump to the current residuals and
// adds it scaled by the shrinkage factor.

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "plcmon/forecasting/predictor.hpp"
#include "plcmon/numerics.hpp"
#include "plcmon/timeseries.hpp"

namespace plcmon {

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  double left = 0.0;
  double right = 0.0;

  double operator()(std::span<const double> x) const { return x[feature] <= threshold ? left : right; }
};

struct BoostParams {
  int k_total = 100;
  double shrinkage = 0.1;

  void validate() const {
    if (k_total < 1) throw std::invalid_argument("l2boost: k_total must be >= 1");
    if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw std::invalid_argument("l2boost: shrinkage must lie in (0, 1]");
  }
};

/// Least-squares stump on (inputs, targets) by exhaustive search over
/// midpoints between consecutive distinct values of every coordinate.
/// `order[f]` holds the row indices sorted by coordinate f.
/// Returns nullopt when no coordinate has two distinct values.
inline std::optional<Stump> fit_stump(const Matrix& inputs, std::span<const double> targets,
                                      const std::vector<std::vector<std::size_t>>& order) {
  const std::size_t n = inputs.rows();
  const double total = std::accumulate(targets.begin(), targets.end(), 0.0);
  std::optional<Stump> best;
  // Maximizing S_L^2/n_L + S_R^2/n_R is equivalent to minimizing the split SSE.
  double best_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < inputs.cols(); ++f) {
    const auto& idx = order[f];
    double left_sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += targets[idx[k]];
      const double a = inputs(idx[k], f);
      const double b = inputs(idx[k + 1], f);
      if (!(a < b)) continue;
      const auto nl = static_cast<double>(k + 1);
      const auto nr = static_cast<double>(n - k - 1);
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr;
      if (gain > best_gain) {
        best_gain = gain;
        best = Stump{f, 0.5 * (a + b), left_sum / nl, right_sum / nr};
      }
    }
  }
  return best;
}

class L2BoostPredictor final : public Predictor {
 public:
  explicit L2BoostPredictor(BoostParams params = {}, std::size_t window = 96) : params_(params), window_(window) {
    params_.validate();
    if (window_ == 0) throw std::invalid_argument("l2boost: window must be >= 1");
  }

  PredictorKind kind() const override { return PredictorKind::l2boost; }
  std::size_t window() const override { return window_; }
  bool fitted() const override { return fitted_; }
  const BoostParams& params() const { return params_; }
  const std::vector<Stump>& stages() const { return stages_; }
  double base() const { return base_; }

  void fit(std::span<const double> train) override {
    if (train.size() <= window_ + 1) throw DataError("l2boost: insufficient training data");
    const auto ws = make_windows(train, window_, train.size());
    fit_windows(ws.train_inputs, ws.train_labels);
  }

  /// Fits on explicit (input, label) pairs; also records the training MSE after every stage.
  void fit_windows(const Matrix& inputs, std::span<const double> labels) {
    const std::size_t n = inputs.rows();
    if (n == 0 || labels.size() != n || inputs.cols() != window_)
      throw std::invalid_argument("l2boost: training pairs do not match the window");
    std::vector<std::vector<std::size_t>> order(window_);
    for (std::size_t f = 0; f < window_; ++f) {
      order[f].resize(n);
      std::iota(order[f].begin(), order[f].end(), std::size_t{0});
      std::stable_sort(order[f].begin(), order[f].end(),
                       [&](std::size_t a, std::size_t b) { return inputs(a, f) < inputs(b, f); });
    }
    base_ = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(n);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = labels[i] - base_;
    stages_.clear();
    train_mse_.clear();
    train_mse_.push_back(mean_square(resid));
    for (int k = 0; k < params_.k_total; ++k) {
      auto stump = fit_stump(inputs, resid, order);
      if (!stump) break;
      stump->left *= params_.shrinkage;
      stump->right *= params_.shrinkage;
      for (std::size_t i = 0; i < n; ++i) resid[i] -= (*stump)(inputs.row(i));
      stages_.push_back(*stump);
      train_mse_.push_back(mean_square(resid));
    }
    fitted_ = true;
  }

  /// Training MSE after 0, 1, ..., stages().size() stages.
  const std::vector<double>& training_mse() const { return train_mse_; }

  json to_json() const override {
    json stages = json::array();
    for (const auto& s : stages_) stages.push_back({s.feature, s.threshold, s.left, s.right});
    return {{"window", window_},
            {"k_total", params_.k_total},
            {"shrinkage", params_.shrinkage},
            {"base", base_},
            {"stages", stages}};
  }
  static L2BoostPredictor from_json(const json& j) {
    L2BoostPredictor p({j.at("k_total").get<int>(), j.at("shrinkage").get<double>()}, j.at("window").get<std::size_t>());
    p.base_ = j.at("base").get<double>();
    for (const auto& s : j.at("stages")) {
      Stump st{s.at(0).get<std::size_t>(), s.at(1).get<double>(), s.at(2).get<double>(), s.at(3).get<double>()};
      if (st.feature >= p.window_) throw DataError("l2boost: stump feature out of range");
      p.stages_.push_back(st);
    }
    if (p.stages_.size() > static_cast<std::size_t>(p.params_.k_total)) throw DataError("l2boost: too many stages");
    p.fitted_ = true;
    return p;
  }
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<L2BoostPredictor>(*this); }

 protected:
  double predict_impl(std::span<const double> recent) const override {
    double y = base_;
    for (const auto& s : stages_) y += s(recent);
    return y;
  }

 private:
  static double mean_square(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(v.size());
  }

  BoostParams params_;
  std::size_t window_;
  double base_ = 0.0;
  std::vector<Stump> stages_;
  std::vector<double> train_mse_;
  bool fitted_ = false;
};

}  // namespace plcmon
