// plcmon: dataset generation, training, detection and experiment runs driven
// by a config file. Exit codes: 0 success, 1 I/O or unexpected failure,
// 2 configuration error, 3 data error, 4 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plcmon/config.hpp"
#include "plcmon/emulator.hpp"
#include "plcmon/eval.hpp"
#include "plcmon/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plcmon;

namespace {

enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

struct Context {
  RunConfig cfg;
  fs::path out;
  bool verbose = false;

  void log(const std::string& msg) const {
    if (verbose) std::cerr << "[plcmon] " << msg << '\n';
  }
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw DataError(std::string(what) + " path is not set ([io] section)");
  if (!fs::is_regular_file(path)) throw DataError(std::string(what) + " '" + path + "' does not exist");
}

std::string result_name(const std::string& experiment, const std::string& predictor, std::uint64_t seed,
                        const char* ext) {
  return experiment + "_" + predictor + "_" + std::to_string(seed) + ext;
}

std::string lower_load(LoadModel m) { return m == LoadModel::l1 ? "l1" : m == LoadModel::l2 ? "l2" : "l3"; }

json fault_json(const FaultSpec& f) {
  return {{"kind", to_string(f.kind)},
          {"onset_index", f.onset_index},
          {"location_m", f.location_m},
          {"extent_m", f.extent_m},
          {"fault_resistance_ohm", f.fault_resistance_ohm},
          {"severity_fraction", f.severity_fraction},
          {"ramp_end_index", f.ramp_end_index},
          {"peak_scale", f.peak_scale},
          {"switch_duration_samples", f.switch_duration_samples},
          {"switch_to", lower_load(f.switch_to)}};
}

json band_json(const BandSpec& b) {
  return {{"n_subcarriers", b.n_subcarriers},
          {"spacing_hz", b.spacing_hz},
          {"start_hz", b.start_hz},
          {"tx_psd_dbm_per_hz", b.tx_psd_dbm_per_hz},
          {"noise_psd_dbm_per_hz", b.noise_psd_dbm_per_hz},
          {"noise_slope_db_per_mhz", b.noise_slope_db_per_mhz},
          {"perturbation_variance_db2", b.perturbation_variance_db2}};
}

fs::path manifest_path_for(const fs::path& dataset) {
  fs::path p = dataset;
  p.replace_extension(".manifest.json");
  return p;
}

/// Onset recorded in a dataset's sidecar manifest, if any.
std::optional<std::size_t> manifest_onset(const fs::path& dataset) {
  const auto mp = manifest_path_for(dataset);
  if (!fs::is_regular_file(mp)) return std::nullopt;
  const json m = read_json(mp);
  const auto& mask = m.at("anomaly_mask");
  if (mask.at("first_anomalous_index").is_null()) return std::nullopt;
  return mask.at("first_anomalous_index").get<std::size_t>();
}

BatchSeries load_batches(const Context& ctx, const std::string& path) {
  require_file(path, "dataset");
  ctx.log("reading " + path);
  if (ctx.cfg.io.dataset_format == "wide") return read_batch_series_csv(path, ctx.cfg.n_batches);
  std::ifstream f(path);
  auto segments = read_long_csv(f);
  const auto longest = std::max_element(segments.begin(), segments.end(),
                                        [](const auto& a, const auto& b) { return a.n_samples() < b.n_samples(); });
  if (segments.size() > 1) ctx.log("long CSV has " + std::to_string(segments.size()) + " segments; using the longest");
  return batch_average(*longest, ctx.cfg.n_batches);
}

PredictorConfig predictor_of_kind(const RunConfig& cfg, const std::string& kind) {
  PredictorConfig p = cfg.predictor;
  p.kind = predictor_kind_from_string(kind);
  return p;
}

// ---------------------------------------------------------------------------

int cmd_generate(const Context& ctx) {
  const Scenario& sc = ctx.cfg.scenario;
  sc.validate();
  const std::uint64_t seed = sc.seed;
  const fs::path csv = ctx.out / ("dataset_" + std::to_string(seed) + ".csv");
  const fs::path loads_csv = ctx.out / ("loads_" + std::to_string(seed) + ".csv");
  ctx.log("generating " + std::to_string(sc.n_samples) + " samples to " + csv.string());

  std::ofstream f(csv, std::ios::binary);
  if (!f) throw IoError("cannot open '" + csv.string() + "' for writing");
  f << panel_csv_header(sc.band.n_subcarriers) << '\n';
  std::string buf;
  std::optional<std::size_t> first_anomalous;
  std::size_t anomalous = 0;
  for_each_snr_row(sc, [&](std::size_t j, std::span<const double> row) {
    buf.clear();
    append_panel_csv_row(buf, j, row);
    f << buf;
    if (sc.anomalous(j)) {
      if (!first_anomalous) first_anomalous = j;
      ++anomalous;
    }
  });
  if (!f) throw IoError("write failed for '" + csv.string() + "'");
  f.close();

  std::ostringstream loads;
  write_load_csv(loads, scenario_loads(sc));
  write_text(loads_csv, loads.str());

  json manifest{{"format", "plcmon-dataset-manifest"},
                {"version", 1},
                {"dataset", csv.filename().string()},
                {"loads", loads_csv.filename().string()},
                {"n_samples", sc.n_samples},
                {"n_subcarriers", sc.band.n_subcarriers},
                {"period_s", kSamplePeriodSeconds},
                {"seed", seed},
                {"load_model", lower_load(sc.load_model)},
                {"band", band_json(sc.band)},
                {"fault", fault_json(sc.fault)},
                {"anomaly_mask",
                 {{"encoding", "true from first_anomalous_index to the end"},
                  {"first_anomalous_index", first_anomalous ? json(*first_anomalous) : json(nullptr)},
                  {"anomalous_count", anomalous}}},
                {"config", to_ini(ctx.cfg)}};
  write_json(manifest_path_for(csv), manifest);
  std::cout << csv.string() << '\n';
  return kOk;
}

int cmd_ingest(const Context& ctx) {
  const auto& path = ctx.cfg.io.dataset;
  require_file(path, "dataset");
  std::vector<SnrPanel> segments;
  if (ctx.cfg.io.dataset_format == "long") {
    std::ifstream f(path);
    segments = read_long_csv(f);
  } else {
    segments.push_back(read_panel_csv(path));
  }
  json summary{{"source", path}, {"format", ctx.cfg.io.dataset_format}, {"segments", json::array()}};
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto bs = batch_average(segments[s], ctx.cfg.n_batches);
    const fs::path out = ctx.out / ("ingest_batches_" + std::to_string(s) + ".csv");
    std::ostringstream os;
    write_batch_series_csv(os, bs);
    write_text(out, os.str());
    json bounds = json::array();
    for (const auto& b : bs.bounds) bounds.push_back({b.begin, b.end});
    summary["segments"].push_back({{"file", out.filename().string()},
                                   {"n_samples", segments[s].n_samples()},
                                   {"n_subcarriers", segments[s].n_subcarriers()},
                                   {"batch_bounds", bounds}});
    ctx.log("segment " + std::to_string(s) + ": " + std::to_string(segments[s].n_samples()) + " samples");
  }
  write_json(ctx.out / "ingest_summary.json", summary);
  return kOk;
}

fs::path models_dir(const Context& ctx) { return ctx.cfg.io.models.empty() ? ctx.out / "models" : fs::path(ctx.cfg.io.models); }

int cmd_train(const Context& ctx) {
  const BatchSeries data = load_batches(ctx, ctx.cfg.io.dataset);
  const std::size_t n = data.n_samples();
  const auto n_tr = static_cast<std::size_t>(std::floor(ctx.cfg.train_fraction * static_cast<double>(n)));
  ctx.log("training " + std::string(to_string(ctx.cfg.predictor.kind)) + " on samples [0, " + std::to_string(n_tr) + ")");
  const TrainedDetector det = train_detector(data, ctx.cfg.predictor, n_tr, ctx.cfg.detector.ridge);

  const fs::path dir = models_dir(ctx);
  fs::create_directories(dir);
  json report{{"dataset", ctx.cfg.io.dataset},
              {"predictor", ctx.cfg.predictor.to_json()},
              {"n_samples", n},
              {"n_tr", n_tr},
              {"window", det.window},
              {"batches", json::array()}};
  for (std::size_t i = 0; i < det.models.size(); ++i) {
    save_model(*det.models[i], (dir / ("batch_" + std::to_string(i) + ".json")).string());
    json row{{"batch", i}, {"model_file", "batch_" + std::to_string(i) + ".json"}};
    const std::span<const double> s = data.series[i];
    if (n_tr < n) {
      try {
        row["test_nrmse"] = normalized_rmse(s.subspan(n_tr), predict_series(*det.models[i], s, n_tr));
      } catch (const DataError& e) {
        row["test_nrmse"] = nullptr;
        row["error"] = e.what();
      }
    }
    report["batches"].push_back(row);
  }
  write_json(dir / "detector.json", {{"format", "plcmon-detector"},
                                     {"version", 1},
                                     {"n_batches", det.models.size()},
                                     {"n_tr", det.n_tr},
                                     {"window", det.window},
                                     {"stats", det.stats.to_json()},
                                     {"train_smd", det.train_smd}});
  write_json(ctx.out / "train_report.json", report);
  return kOk;
}

TrainedDetector load_detector(const fs::path& dir) {
  const json dj = read_json(dir / "detector.json");
  if (dj.value("format", "") != "plcmon-detector" || dj.value("version", 0) != 1)
    throw DataError("detector.json: unsupported format or version");
  TrainedDetector det;
  try {
    det.stats = ErrorStats::from_json(dj.at("stats"));
    det.n_tr = dj.at("n_tr").get<std::size_t>();
    det.window = dj.at("window").get<std::size_t>();
    det.train_smd = dj.at("train_smd").get<std::vector<double>>();
    const auto nb = dj.at("n_batches").get<std::size_t>();
    for (std::size_t i = 0; i < nb; ++i) {
      const fs::path mp = dir / ("batch_" + std::to_string(i) + ".json");
      if (!fs::is_regular_file(mp)) throw DataError("missing model file '" + mp.string() + "'");
      det.models.push_back(load_model(mp.string()));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("detector.json: ") + e.what());
  }
  if (det.models.size() != det.stats.dim()) throw DataError("detector.json: model count does not match stats dimension");
  if (models_window(det.models) != det.window) throw DataError("detector.json: window does not match the models");
  return det;
}

int cmd_detect(const Context& ctx) {
  const fs::path dir = models_dir(ctx);
  if (!fs::is_regular_file(dir / "detector.json")) throw DataError("no trained detector in '" + dir.string() + "'");
  const TrainedDetector det = load_detector(dir);
  const BatchSeries data = load_batches(ctx, ctx.cfg.io.dataset);
  if (data.n_batches() != det.models.size())
    throw DataError("dataset has " + std::to_string(data.n_batches()) + " batches but " +
                    std::to_string(det.models.size()) + " models were trained");
  const auto& dc = ctx.cfg.detector;
  const DetectionReport rep = run_detection(det, data, det.window, data.n_samples(), dc.p_fa, dc.mode);
  const std::string pred = to_string(det.models.front()->kind());
  std::ostringstream os;
  rep.write_csv(os);
  write_text(ctx.out / result_name("detect", pred, ctx.cfg.scenario.seed, ".csv"), os.str());
  json summary = rep.summary(manifest_onset(ctx.cfg.io.dataset));
  summary["dataset"] = ctx.cfg.io.dataset;
  summary["predictor"] = pred;
  write_json(ctx.out / result_name("detect", pred, ctx.cfg.scenario.seed, ".json"), summary);
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

RocSpec roc_spec(const RunConfig& cfg, const PredictorConfig& p) {
  RocSpec s;
  s.base = cfg.scenario;
  s.predictor = p;
  s.n_batches = cfg.n_batches;
  s.n_samples = days_to_samples(cfg.roc.days);
  s.onset_index = days_to_samples(cfg.roc.onset_day);
  s.n_tr = days_to_samples(cfg.roc.train_days);
  s.trials = cfg.roc.trials;
  s.seed_base = cfg.roc.seed_base;
  s.span = cfg.roc.span;
  s.p_fa = cfg.detector.p_fa;
  s.mode = cfg.detector.mode;
  s.ridge = cfg.detector.ridge;
  return s;
}

int cmd_roc(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<std::pair<std::string, FaultSpec>> variants;
  if (cfg.roc.severities.empty()) {
    variants.emplace_back(to_string(cfg.scenario.fault.kind), cfg.scenario.fault);
  } else {
    for (double sev : cfg.roc.severities) {
      FaultSpec f = cfg.scenario.fault;
      f.kind = FaultKind::distributed;
      f.severity_fraction = sev;
      variants.emplace_back("distributed_" + detail::fmt_double(sev), f);
    }
  }
  if (cfg.roc.include_healthy) variants.emplace_back("healthy", FaultSpec{});
  for (const auto& [label, f] : variants)
    if (f.kind == FaultKind::none && label != "healthy") throw ConfigError("roc: [fault] kind must not be none");

  for (const auto& kind : cfg.roc.predictors) {
    const PredictorConfig p = predictor_of_kind(cfg, kind);
    const RocSpec spec = roc_spec(cfg, p);
    ctx.log("roc: " + kind + ", " + std::to_string(spec.trials) + " trials");
    const auto results = run_roc_variants(spec, variants);
    std::string csv = "variant,threshold,p_fa,p_dt\n";
    json summary{{"predictor", kind}, {"seed_base", spec.seed_base}, {"trials", spec.trials},
                 {"span", spec.span}, {"onset_index", spec.onset_index}, {"n_tr", spec.n_tr},
                 {"variants", json::array()}};
    for (const auto& r : results) {
      for (const auto& pt : r.curve.points) {
        csv += r.label + ',';
        if (std::isinf(pt.threshold)) {
          csv += "inf";
        } else {
          detail::append_fixed(csv, pt.threshold);
        }
        csv += ',';
        detail::append_fixed(csv, pt.p_fa);
        csv += ',';
        detail::append_fixed(csv, pt.p_dt);
        csv += '\n';
      }
      json first = json::array();
      for (const auto& t : r.trials) first.push_back(t.first_alarm ? json(*t.first_alarm) : json(nullptr));
      summary["variants"].push_back({{"label", r.label},
                                     {"fault", fault_json(r.fault)},
                                     {"auc", r.curve.auc},
                                     {"median_trial_auc", r.median_trial_auc()},
                                     {"trial_auc", r.trial_aucs()},
                                     {"first_alarm_at_or_after_onset", first}});
    }
    write_text(ctx.out / result_name("roc", kind, spec.seed_base, ".csv"), csv);
    write_json(ctx.out / result_name("roc", kind, spec.seed_base, ".json"), summary);
  }
  return kOk;
}

int cmd_benchmark(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<NamedDataset> datasets;
  for (const auto& lm : cfg.benchmark.load_models) {
    for (std::size_t s = 0; s < cfg.benchmark.seeds; ++s) {
      Scenario sc = cfg.scenario;
      sc.load_model = load_model_from_string(lm);
      sc.fault = FaultSpec{};
      sc.n_samples = days_to_samples(cfg.benchmark.days);
      sc.seed = cfg.scenario.seed + s;
      ctx.log("benchmark dataset " + lm + " seed " + std::to_string(sc.seed));
      datasets.push_back({lm + "_seed" + std::to_string(sc.seed), generate_batch_series(sc, cfg.n_batches)});
    }
  }
  std::vector<NamedPredictor> predictors;
  for (const auto& k : cfg.benchmark.predictors) predictors.push_back({k, predictor_of_kind(cfg, k)});
  const auto cells = run_predictor_benchmark(datasets, predictors, cfg.train_fraction);
  std::string csv = "dataset,predictor,nrmse,error\n";
  json j = json::array();
  for (const auto& c : cells) {
    csv += c.dataset + ',' + c.predictor + ',';
    if (c.nrmse) detail::append_fixed(csv, *c.nrmse);
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    csv += ',' + err + '\n';
    j.push_back({{"dataset", c.dataset},
                 {"predictor", c.predictor},
                 {"nrmse", c.nrmse ? json(*c.nrmse) : json(nullptr)},
                 {"per_batch", c.per_batch},
                 {"error", c.error}});
  }
  write_text(ctx.out / result_name("benchmark", "all", cfg.scenario.seed, ".csv"), csv);
  write_json(ctx.out / result_name("benchmark", "all", cfg.scenario.seed, ".json"), j);
  std::cout << csv;
  return kOk;
}

int cmd_transfer(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  Scenario src = cfg.scenario;
  src.load_model = cfg.transfer.source_load;
  src.fault = FaultSpec{};
  src.n_samples = days_to_samples(cfg.transfer.source_days);
  ctx.log("transfer source " + lower_load(src.load_model));
  const BatchSeries source = cfg.io.dataset.empty() ? generate_batch_series(src, cfg.n_batches)
                                                    : load_batches(ctx, cfg.io.dataset);
  BatchSeries target;
  std::optional<std::size_t> onset;
  if (!cfg.io.target_dataset.empty()) {
    target = load_batches(ctx, cfg.io.target_dataset);
    onset = manifest_onset(cfg.io.target_dataset);
  } else {
    Scenario tgt = cfg.scenario;
    tgt.load_model = cfg.transfer.target_load;
    tgt.n_samples = days_to_samples(cfg.transfer.target_days);
    tgt.seed = cfg.scenario.seed + cfg.transfer.target_seed_offset;
    ctx.log("transfer target " + lower_load(tgt.load_model) + " with fault " + to_string(tgt.fault.kind));
    target = generate_batch_series(tgt, cfg.n_batches);
    if (tgt.fault.kind != FaultKind::none) onset = tgt.fault.onset_index;
  }
  TransferConfig tc{cfg.train_fraction, cfg.detector.p_fa, cfg.detector.mode, cfg.detector.ridge};
  const auto res = run_transfer(source, target, cfg.predictor, tc);
  const std::string pred = to_string(cfg.predictor.kind);
  std::ostringstream os;
  res.report.write_csv(os);
  write_text(ctx.out / result_name("transfer", pred, cfg.scenario.seed, ".csv"), os.str());
  json summary = res.report.summary(onset);
  if (onset) {
    std::size_t healthy = 0;
    std::size_t healthy_alarms = 0;
    for (std::size_t k = 0; k < res.report.index.size(); ++k)
      if (res.report.index[k] < *onset) {
        ++healthy;
        healthy_alarms += res.report.alarms[k] ? 1 : 0;
      }
    summary["healthy_alarm_rate"] = healthy ? static_cast<double>(healthy_alarms) / static_cast<double>(healthy) : 0.0;
  }
  summary["predictor"] = pred;
  write_json(ctx.out / result_name("transfer", pred, cfg.scenario.seed, ".json"), summary);
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int cmd_incipient(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  IncipientSpec spec;
  spec.scenario = cfg.scenario;
  spec.scenario.n_samples = days_to_samples(cfg.incipient.days);
  spec.scenario.fault.kind = FaultKind::incipient;
  spec.scenario.fault.onset_index = days_to_samples(cfg.incipient.onset_day);
  spec.scenario.fault.ramp_end_index = spec.scenario.n_samples;
  spec.predictor = cfg.predictor;
  spec.n_batches = cfg.n_batches;
  spec.train_fraction = cfg.incipient.train_fraction;
  spec.p_fa_grid = cfg.incipient.p_fa_grid;
  spec.mode = cfg.detector.mode;
  spec.ridge = cfg.detector.ridge;
  spec.permutations = cfg.incipient.permutations;
  ctx.log("incipient: " + std::to_string(spec.scenario.n_samples) + " samples, onset " +
          std::to_string(spec.scenario.fault.onset_index));
  const auto r = run_incipient(spec);
  const std::string pred = to_string(cfg.predictor.kind);
  std::string csv = "index,smd\n";
  for (std::size_t k = 0; k < r.smd.size(); ++k) {
    csv += std::to_string(r.n_tr + k) + ',';
    detail::append_fixed(csv, r.smd[k]);
    csv += '\n';
  }
  write_text(ctx.out / result_name("incipient", pred, cfg.scenario.seed, ".csv"), csv);
  json points = json::array();
  for (const auto& p : r.points)
    points.push_back({{"p_fa", p.p_fa},
                      {"threshold", p.threshold},
                      {"first_alarm_at_or_after_onset", p.first_alarm ? json(*p.first_alarm) : json(nullptr)},
                      {"first_alarm_day",
                       p.first_alarm ? json(static_cast<double>(*p.first_alarm) / kSamplesPerDay) : json(nullptr)},
                      {"pre_onset_alarm_rate", p.pre_onset_alarm_rate},
                      {"post_onset_alarm_rate", p.post_onset_alarm_rate}});
  json summary{{"predictor", pred},
               {"onset_index", r.onset},
               {"n_tr", r.n_tr},
               {"theil_sen_slope_per_day", r.trend.slope},
               {"trend_p_value", r.trend.p_value},
               {"daily_mean_smd", r.daily_mean_smd},
               {"points", points}};
  write_json(ctx.out / result_name("incipient", pred, cfg.scenario.seed, ".json"), summary);
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plcmon: PLC SNR synthesis, forecasting and cable anomaly detection"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool verbose = false;
  app.add_option("--config", config_path, "INI config file or dataset manifest JSON");
  app.add_option("--seed", seed, "Override the scenario seed (and the ROC seed base)");
  app.add_option("--out", out_dir, "Output directory (default: $PLCMON_OUT_DIR or .)");
  app.add_flag("--verbose", verbose, "Progress messages on stderr");

  const std::vector<std::pair<std::string, int (*)(const Context&)>> commands{
      {"generate", cmd_generate},   {"ingest", cmd_ingest},       {"train", cmd_train},
      {"detect", cmd_detect},       {"roc", cmd_roc},             {"benchmark", cmd_benchmark},
      {"transfer", cmd_transfer},   {"incipient", cmd_incipient}};
  const std::map<std::string, std::string> help{
      {"generate", "Synthesize an SNR dataset (CSV + manifest)"},
      {"ingest", "Batch-average an external CSV recording"},
      {"train", "Fit per-batch predictors and error statistics"},
      {"detect", "Run anomaly detection with a trained detector"},
      {"roc", "ROC over repeated fault trials"},
      {"benchmark", "Normalized RMSE of each predictor"},
      {"transfer", "Train on one dataset, detect on another"},
      {"incipient", "Incipient-fault detection delay and SMD trend"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    Context ctx;
    ctx.verbose = verbose;
    IniDocument doc = config_path.empty() ? IniDocument{"<defaults>", {}} : load_config_document(config_path);
    ConfigReader reader(std::move(doc));
    ctx.cfg = read_run_config(reader);
    reader.finish();
    if (seed) {
      ctx.cfg.scenario.seed = *seed;
      ctx.cfg.roc.seed_base = *seed;
    }
    if (out_dir.empty()) {
      const char* env = std::getenv("PLCMON_OUT_DIR");
      out_dir = env && *env ? env : ".";
    }
    ctx.out = out_dir;
    fs::create_directories(ctx.out);
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(ctx);
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
}
