#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcmon/errors.hpp"

namespace plcmon {

using json = nlohmann::json;

enum class PredictorKind { baseline, avg, arima, l2boost, ffnn, lstm };

inline const char* to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::baseline: return "baseline";
    case PredictorKind::avg: return "avg";
    case PredictorKind::arima: return "arima";
    case PredictorKind::l2boost: return "l2boost";
    case PredictorKind::ffnn: return "ffnn";
    case PredictorKind::lstm: return "lstm";
  }
  return "?";
}

inline PredictorKind predictor_kind_from_string(const std::string& s) {
  for (auto k : {PredictorKind::baseline, PredictorKind::avg, PredictorKind::arima, PredictorKind::l2boost,
                 PredictorKind::ffnn, PredictorKind::lstm})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown predictor kind '" + s + "'");
}

/// One-step-ahead forecaster of a single batch series. After fit() the model
/// is immutable; predict_one is a pure function of the fitted state and the window.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual PredictorKind kind() const = 0;
  /// Number of trailing samples consumed by predict_one.
  virtual std::size_t window() const = 0;
  virtual bool fitted() const = 0;

  /// Fits on the leading training segment of a series.
  virtual void fit(std::span<const double> train_series) = 0;

  /// Forecast of the sample following `window` (window.size() == window()).
  double predict_one(std::span<const double> recent) const {
    if (!fitted()) throw std::logic_error(std::string(to_string(kind())) + ": predict on unfitted model");
    if (recent.size() != window())
      throw std::invalid_argument("predict_one: window length " + std::to_string(recent.size()) + " != " +
                                  std::to_string(window()));
    return predict_impl(recent);
  }

  /// Hyperparameters and fitted parameters (without the file envelope).
  virtual json to_json() const = 0;
  virtual std::unique_ptr<Predictor> clone() const = 0;

 protected:
  virtual double predict_impl(std::span<const double> recent) const = 0;
};

/// Rolling one-step forecasts for indices [from, series.size()), each using the true past values.
inline std::vector<double> predict_series(const Predictor& model, std::span<const double> series, std::size_t from) {
  const std::size_t w = model.window();
  if (from < w) throw std::invalid_argument("predict_series: from must be >= window");
  std::vector<double> out;
  out.reserve(series.size() > from ? series.size() - from : 0);
  for (std::size_t n = from; n < series.size(); ++n) out.push_back(model.predict_one(series.subspan(n - w, w)));
  return out;
}

}  // namespace plcmon
