#pragma once

// One predictor per stabilizer batch, their error vectors
//   delta_j = (F_i(v_{i,j-w}) - z_{i,j})_i
// and the detector fitted on the training-span errors.

#include <memory>
#include <vector>

#include "plcmon/detector.hpp"
#include "plcmon/forecasting.hpp"
#include "plcmon/timeseries.hpp"

namespace plcmon {

using BatchModels = std::vector<std::shared_ptr<const Predictor>>;

/// Fits one predictor per batch on samples [0, n_tr).
inline BatchModels fit_batch_models(const BatchSeries& data, const PredictorConfig& cfg, std::size_t n_tr) {
  if (n_tr > data.n_samples()) throw DataError("fit_batch_models: n_tr exceeds the series length");
  BatchModels models;
  for (const auto& s : data.series) {
    const std::span<const double> train(s.data(), n_tr);
    models.push_back(fit_predictor(cfg, train));
  }
  return models;
}

inline std::size_t models_window(const BatchModels& models) {
  if (models.empty()) throw DataError("no models");
  const std::size_t w = models.front()->window();
  for (const auto& m : models)
    if (m->window() != w) throw DataError("batch models disagree on the window length");
  return w;
}

/// Error vectors for samples [from, to): row r holds delta_{from + r}.
inline Matrix prediction_errors(const BatchModels& models, const BatchSeries& data, std::size_t from, std::size_t to) {
  if (models.size() != data.n_batches())
    throw DataError("model count " + std::to_string(models.size()) + " does not match batch count " +
                    std::to_string(data.n_batches()));
  const std::size_t w = models_window(models);
  if (from < w) throw std::invalid_argument("prediction_errors: from must be >= window");
  to = std::min(to, data.n_samples());
  Matrix out(to > from ? to - from : 0, data.n_batches());
  for (std::size_t i = 0; i < data.n_batches(); ++i) {
    const std::span<const double> s = data.series[i];
    for (std::size_t j = from; j < to; ++j) out(j - from, i) = models[i]->predict_one(s.subspan(j - w, w)) - s[j];
  }
  return out;
}

/// Fitted batch models together with the error statistics of their training span.
struct TrainedDetector {
  BatchModels models;
  ErrorStats stats;
  std::vector<double> train_smd;  // SMDs of samples [w, n_tr)
  std::size_t n_tr = 0;
  std::size_t window = 0;

  double threshold(double p_fa, ThresholdMode mode) const {
    if (mode == ThresholdMode::theoretical)
      return threshold_theoretical(p_fa, ChiSquaredDof(static_cast<int>(stats.dim())));
    return threshold_empirical(train_smd, p_fa, n_tr, window);
  }
};

inline TrainedDetector train_detector(const BatchSeries& data, const PredictorConfig& cfg, std::size_t n_tr,
                                      double ridge = -1.0) {
  TrainedDetector d;
  d.models = fit_batch_models(data, cfg, n_tr);
  d.window = models_window(d.models);
  d.n_tr = n_tr;
  if (n_tr <= d.window) throw DataError("train_detector: training span shorter than the window");
  const Matrix train_err = prediction_errors(d.models, data, d.window, n_tr);
  d.stats = fit_error_stats(train_err, ridge);
  d.train_smd = smd_series(d.stats, train_err);
  return d;
}

/// Detection over samples [from, to) of `data` with an already trained detector.
inline DetectionReport run_detection(const TrainedDetector& det, const BatchSeries& data, std::size_t from,
                                     std::size_t to, double p_fa, ThresholdMode mode) {
  const Matrix err = prediction_errors(det.models, data, from, to);
  return detect(det.stats, err, det.threshold(p_fa, mode), p_fa, mode, from);
}

}  // namespace plcmon
