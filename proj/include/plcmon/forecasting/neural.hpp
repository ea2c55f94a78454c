#pragma once

// Shared machinery for the two neural forecasters: z-score normalization,
// seeded initialization and gradient-based training with early stopping on a
// validation tail. A network type provides
//   std::size_t size() const;                       // parameter count
//   void init(std::span<double>, std::mt19937_64&) const;
//   double forward(std::span<const double> params, std::span<const double> x) const;
//   double loss_and_grad(params, inputs, targets, rows, grad) const;
// where inputs and targets are already normalized and the loss is the mean
// squared error over `rows`.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "plcmon/forecasting/predictor.hpp"
#include "plcmon/numerics.hpp"
#include "plcmon/timeseries.hpp"

namespace plcmon {

enum class Optimizer { momentum, adam };

inline const char* to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "momentum"; }

inline Optimizer optimizer_from_string(const std::string& s) {
  if (s == "momentum") return Optimizer::momentum;
  if (s == "adam") return Optimizer::adam;
  throw ConfigError("unknown optimizer '" + s + "'");
}

struct NetTrainConfig {
  Optimizer optimizer = Optimizer::momentum;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 500;
  std::size_t batch_size = 0;  // 0: full batch
  double validation_fraction = 0.2;
  int patience = 50;  // epochs without validation improvement before stopping
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("net: learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("net: momentum must lie in [0, 1)");
    if (epochs < 1) throw std::invalid_argument("net: epochs must be >= 1");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw std::invalid_argument("net: validation_fraction must lie in [0, 1)");
    if (patience < 1) throw std::invalid_argument("net: patience must be >= 1");
  }

  json to_json() const {
    return {{"optimizer", to_string(optimizer)}, {"learning_rate", learning_rate},
            {"momentum", momentum},              {"epochs", epochs},
            {"batch_size", batch_size},          {"validation_fraction", validation_fraction},
            {"patience", patience},              {"seed", seed}};
  }
  static NetTrainConfig from_json(const json& j) {
    NetTrainConfig c;
    c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.validation_fraction = j.at("validation_fraction").get<double>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  }
};

struct Normalization {
  double mean = 0.0;
  double scale = 1.0;  // > 0

  double apply(double x) const { return (x - mean) / scale; }
  double invert(double z) const { return z * scale + mean; }
};

inline Normalization fit_normalization(std::span<const double> x) {
  Normalization n;
  n.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - n.mean) * (v - n.mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size()));
  n.scale = sd > 1e-12 ? sd : 1.0;
  return n;
}

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_epoch = -1;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Trains `params` in place. Rows [0, n_fit) are optimized; rows [n_fit, n)
/// are the validation tail used for early stopping. The returned parameters
/// are those with the lowest validation loss (training loss when there is no tail).
template <class Net>
TrainHistory train_network(const Net& net, std::vector<double>& params, const Matrix& inputs,
                           std::span<const double> targets, const NetTrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = inputs.rows();
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
  if (n - n_val < 1) throw DataError("net: no training rows left after the validation split");
  const std::size_t n_fit = n - n_val;

  std::vector<std::size_t> fit_rows(n_fit);
  std::iota(fit_rows.begin(), fit_rows.end(), std::size_t{0});
  std::vector<std::size_t> val_rows(n_val);
  std::iota(val_rows.begin(), val_rows.end(), n_fit);

  const std::size_t p = params.size();
  std::vector<double> grad(p);
  std::vector<double> m1(p, 0.0);
  std::vector<double> m2(p, 0.0);
  std::vector<double> best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x5eed));
  const std::size_t batch = cfg.batch_size == 0 ? n_fit : std::min(cfg.batch_size, n_fit);
  long step = 0;
  int since_best = 0;
  TrainHistory hist;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n_fit) std::shuffle(fit_rows.begin(), fit_rows.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_fit; start += batch) {
      const std::size_t len = std::min(batch, n_fit - start);
      const std::span<const std::size_t> rows(fit_rows.data() + start, len);
      const double loss = net.loss_and_grad(params, inputs, targets, rows, grad);
      if (!std::isfinite(loss)) throw NumericalError("net: training loss became non-finite at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(len);
      ++step;
      if (cfg.optimizer == Optimizer::momentum) {
        for (std::size_t k = 0; k < p; ++k) {
          m1[k] = cfg.momentum * m1[k] - cfg.learning_rate * grad[k];
          params[k] += m1[k];
        }
      } else {
        constexpr double b1 = 0.9;
        constexpr double b2 = 0.999;
        constexpr double eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        for (std::size_t k = 0; k < p; ++k) {
          m1[k] = b1 * m1[k] + (1.0 - b1) * grad[k];
          m2[k] = b2 * m2[k] + (1.0 - b2) * grad[k] * grad[k];
          params[k] -= cfg.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
        }
      }
    }
    hist.train_loss.push_back(epoch_loss / static_cast<double>(n_fit));
    double monitor = hist.train_loss.back();
    if (n_val > 0) {
      monitor = net.loss_and_grad(params, inputs, targets, val_rows, {});
      hist.validation_loss.push_back(monitor);
    }
    if (!std::isfinite(monitor)) throw NumericalError("net: validation loss became non-finite");
    if (monitor < best_loss) {
      best_loss = monitor;
      best = params;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  params = std::move(best);
  return hist;
}

/// Forecaster wrapping a network type; inputs and targets share one
/// normalization fitted on the training series.
template <class Net>
class NeuralPredictor final : public Predictor {
 public:
  explicit NeuralPredictor(std::size_t window = 96, NetTrainConfig cfg = {}) : net_(window), cfg_(cfg) {
    cfg_.validate();
  }

  PredictorKind kind() const override { return Net::kind; }
  std::size_t window() const override { return net_.window(); }
  bool fitted() const override { return fitted_; }

  const Net& net() const { return net_; }
  const NetTrainConfig& train_config() const { return cfg_; }
  const std::vector<double>& params() const { return params_; }
  const Normalization& normalization() const { return norm_; }
  const TrainHistory& history() const { return history_; }

  /// Installs explicit parameters (normalized domain) and normalization.
  void set_state(std::vector<double> params, Normalization norm) {
    if (params.size() != net_.size()) throw std::invalid_argument("net: parameter count mismatch");
    for (double v : params)
      if (!std::isfinite(v)) throw DataError("net: non-finite parameter");
    if (!(norm.scale > 0.0) || !std::isfinite(norm.mean)) throw DataError("net: invalid normalization");
    params_ = std::move(params);
    norm_ = norm;
    fitted_ = true;
  }

  void fit(std::span<const double> train) override {
    const std::size_t w = window();
    if (train.size() < w + 8) throw DataError(std::string(to_string(kind())) + ": insufficient training data");
    norm_ = fit_normalization(train);
    std::vector<double> z(train.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = norm_.apply(train[i]);
    const auto ws = make_windows(z, w, z.size());
    params_.assign(net_.size(), 0.0);
    std::mt19937_64 rng(mix_seed(cfg_.seed, 0x1417));
    net_.init(params_, rng);
    history_ = train_network(net_, params_, ws.train_inputs, ws.train_labels, cfg_);
    fitted_ = true;
  }

  json to_json() const override {
    return {{"window", window()},
            {"train", cfg_.to_json()},
            {"norm_mean", norm_.mean},
            {"norm_scale", norm_.scale},
            {"params", params_}};
  }
  static NeuralPredictor from_json(const json& j) {
    NeuralPredictor p(j.at("window").get<std::size_t>(), NetTrainConfig::from_json(j.at("train")));
    p.set_state(j.at("params").get<std::vector<double>>(),
                {j.at("norm_mean").get<double>(), j.at("norm_scale").get<double>()});
    return p;
  }
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<NeuralPredictor>(*this); }

 protected:
  double predict_impl(std::span<const double> recent) const override {
    std::vector<double> z(recent.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = norm_.apply(recent[i]);
    return norm_.invert(net_.forward(params_, z));
  }

 private:
  Net net_;
  NetTrainConfig cfg_;
  std::vector<double> params_;
  Normalization norm_;
  TrainHistory history_;
  bool fitted_ = false;
};

}  // namespace plcmon
