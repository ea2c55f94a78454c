#pragma once

// Predictor construction from a configuration record and the versioned JSON
// model file format:
//   {"format": "plcmon-model", "version": 1, "kind": ..., "model": {...}, "checksum": "<fnv1a64 hex>"}
// The checksum covers the compact dump of "model".

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "plcmon/forecasting/arima.hpp"
#include "plcmon/forecasting/ffnn.hpp"
#include "plcmon/forecasting/l2boost.hpp"
#include "plcmon/forecasting/lstm.hpp"
#include "plcmon/forecasting/simple.hpp"

namespace plcmon {

inline constexpr int kModelFormatVersion = 1;

struct PredictorConfig {
  PredictorKind kind = PredictorKind::arima;
  std::size_t window = 96;
  ArimaOrder arima_order{2, 1, 1};
  bool arima_select = false;  // run the 24-candidate search instead of using arima_order
  double arima_validation_fraction = 0.2;
  BoostParams boost{};
  NetTrainConfig net{};

  json to_json() const {
    json j{{"kind", to_string(kind)}, {"window", window}};
    switch (kind) {
      case PredictorKind::arima:
        j["order"] = {arima_order.p, arima_order.d, arima_order.q};
        j["select"] = arima_select;
        j["validation_fraction"] = arima_validation_fraction;
        break;
      case PredictorKind::l2boost:
        j["k_total"] = boost.k_total;
        j["shrinkage"] = boost.shrinkage;
        break;
      case PredictorKind::ffnn:
      case PredictorKind::lstm: j["train"] = net.to_json(); break;
      default: break;
    }
    return j;
  }
};

/// Unfitted predictor for `cfg` (for arima_select, a placeholder with arima_order).
inline std::unique_ptr<Predictor> make_predictor(const PredictorConfig& cfg) {
  switch (cfg.kind) {
    case PredictorKind::baseline: return std::make_unique<BaselinePredictor>(cfg.window);
    case PredictorKind::avg: return std::make_unique<AvgPredictor>(cfg.window);
    case PredictorKind::arima: return std::make_unique<ArimaPredictor>(cfg.arima_order, cfg.window);
    case PredictorKind::l2boost: return std::make_unique<L2BoostPredictor>(cfg.boost, cfg.window);
    case PredictorKind::ffnn: return std::make_unique<FfnnPredictor>(cfg.window, cfg.net);
    case PredictorKind::lstm: return std::make_unique<LstmPredictor>(cfg.window, cfg.net);
  }
  throw ConfigError("unsupported predictor kind");
}

/// Builds and fits a predictor on a training series.
inline std::unique_ptr<Predictor> fit_predictor(const PredictorConfig& cfg, std::span<const double> train) {
  if (cfg.kind == PredictorKind::arima && cfg.arima_select) {
    const auto search = arima_grid_search(train, cfg.arima_validation_fraction, cfg.window);
    return std::make_unique<ArimaPredictor>(search.best, cfg.window);
  }
  auto model = make_predictor(cfg);
  model->fit(train);
  return model;
}

inline std::string fnv1a64_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json model_envelope(const Predictor& model) {
  if (!model.fitted()) throw std::logic_error("cannot serialize an unfitted model");
  json body = model.to_json();
  return {{"format", "plcmon-model"},
          {"version", kModelFormatVersion},
          {"kind", to_string(model.kind())},
          {"model", body},
          {"checksum", fnv1a64_hex(body.dump())}};
}

inline std::unique_ptr<Predictor> model_from_envelope(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "plcmon-model") throw DataError("model file: not a plcmon model");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("model file: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
    const json& body = j.at("model");
    if (fnv1a64_hex(body.dump()) != j.at("checksum").get<std::string>())
      throw DataError("model file: checksum mismatch");
    PredictorKind kind;
    try {
      kind = predictor_kind_from_string(j.at("kind").get<std::string>());
    } catch (const ConfigError& e) {
      throw DataError(std::string("model file: ") + e.what());
    }
    switch (kind) {
      case PredictorKind::baseline: return BaselinePredictor::from_json(body).clone();
      case PredictorKind::avg: return AvgPredictor::from_json(body).clone();
      case PredictorKind::arima: return ArimaPredictor::from_json(body).clone();
      case PredictorKind::l2boost: return L2BoostPredictor::from_json(body).clone();
      case PredictorKind::ffnn: return FfnnPredictor::from_json(body).clone();
      case PredictorKind::lstm: return LstmPredictor::from_json(body).clone();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: malformed content: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file: invalid parameters: ") + e.what());
  }
  throw DataError("model file: unknown kind");
}

inline void save_model(const Predictor& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << model_envelope(model).dump(1) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline std::unique_ptr<Predictor> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw DataError("model file '" + path + "': " + e.what());
  }
  return model_from_envelope(j);
}

}  // namespace plcmon
