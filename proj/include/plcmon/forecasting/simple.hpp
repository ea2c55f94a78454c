#pragma once

// The two trivial reference forecasters.

#include <numeric>

#include "plcmon/forecasting/predictor.hpp"

namespace plcmon {

/// Single-step extrapolation: x~_n = x_{n-1}. Needs no fitting.
class BaselinePredictor final : public Predictor {
 public:
  explicit BaselinePredictor(std::size_t window = 1) : window_(window) {
    if (window_ == 0) throw std::invalid_argument("baseline: window must be >= 1");
  }

  PredictorKind kind() const override { return PredictorKind::baseline; }
  std::size_t window() const override { return window_; }
  bool fitted() const override { return true; }
  void fit(std::span<const double>) override {}

  json to_json() const override { return {{"window", window_}}; }
  static BaselinePredictor from_json(const json& j) { return BaselinePredictor(j.at("window").get<std::size_t>()); }
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<BaselinePredictor>(*this); }

 protected:
  double predict_impl(std::span<const double> recent) const override { return recent.back(); }

 private:
  std::size_t window_;
};

/// Constant forecast equal to the training mean.
class AvgPredictor final : public Predictor {
 public:
  explicit AvgPredictor(std::size_t window = 1) : window_(window) {
    if (window_ == 0) throw std::invalid_argument("avg: window must be >= 1");
  }

  PredictorKind kind() const override { return PredictorKind::avg; }
  std::size_t window() const override { return window_; }
  bool fitted() const override { return fitted_; }

  void fit(std::span<const double> train) override {
    if (train.empty()) throw DataError("avg: empty training series");
    mean_ = std::accumulate(train.begin(), train.end(), 0.0) / static_cast<double>(train.size());
    fitted_ = true;
  }

  double mean() const { return mean_; }

  json to_json() const override { return {{"window", window_}, {"mean", mean_}}; }
  static AvgPredictor from_json(const json& j) {
    AvgPredictor p(j.at("window").get<std::size_t>());
    p.mean_ = j.at("mean").get<double>();
    p.fitted_ = true;
    return p;
  }
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<AvgPredictor>(*this); }

 protected:
  double predict_impl(std::span<const double>) const override { return mean_; }

 private:
  std::size_t window_;
  double mean_ = 0.0;
  bool fitted_ = false;
};

}  // namespace plcmon
