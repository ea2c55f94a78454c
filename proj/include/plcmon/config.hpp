#pragma once

// Strict INI-style run configuration.
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Every key must be known to the section that reads it; ConfigReader::finish
// reports the first unread key with its line number. Lists are comma
// separated. A JSON dataset manifest can stand in for a config file: its
// "config" member holds the resolved INI text.

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcmon/emulator.hpp"
#include "plcmon/eval.hpp"
#include "plcmon/forecasting.hpp"

namespace plcmon {

struct IniEntry {
  std::string value;
  std::size_t line = 0;
};

struct IniDocument {
  std::string source;
  std::map<std::string, std::map<std::string, IniEntry>> sections;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    auto item = trim(std::string_view(s).substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline IniDocument parse_ini(std::istream& in, const std::string& source) {
  IniDocument doc;
  doc.source = source;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any section");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    auto& sec = doc.sections[section];
    if (sec.count(key)) fail("duplicate key '" + key + "' in [" + section + "] (first at line " +
                             std::to_string(sec[key].line) + ")");
    sec[key] = {value, line_no};
  }
  return doc;
}

inline IniDocument parse_ini_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  return parse_ini(in, source);
}

/// Typed access to an IniDocument that remembers which keys were read.
class ConfigReader {
 public:
  explicit ConfigReader(IniDocument doc) : doc_(std::move(doc)) {}

  bool has_section(const std::string& s) const { return doc_.sections.count(s) > 0; }
  bool has(const std::string& s, const std::string& k) const {
    const auto it = doc_.sections.find(s);
    return it != doc_.sections.end() && it->second.count(k);
  }

  std::string get_string(const std::string& s, const std::string& k, const std::string& def) {
    const IniEntry* e = find(s, k);
    return e ? e->value : def;
  }

  double get_double(const std::string& s, const std::string& k, double def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    return parse_number<double>(*e, s, k, "a number");
  }

  long long get_int(const std::string& s, const std::string& k, long long def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    return parse_number<long long>(*e, s, k, "an integer");
  }

  std::size_t get_count(const std::string& s, const std::string& k, std::size_t def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    const auto v = parse_number<long long>(*e, s, k, "an integer");
    if (v < 0) error(*e, s, k, "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t get_u64(const std::string& s, const std::string& k, std::uint64_t def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    return parse_number<std::uint64_t>(*e, s, k, "a non-negative integer");
  }

  bool get_bool(const std::string& s, const std::string& k, bool def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    error(*e, s, k, "expected true or false");
  }

  std::vector<std::string> get_list(const std::string& s, const std::string& k, std::vector<std::string> def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    return detail::split_list(e->value);
  }

  std::vector<double> get_double_list(const std::string& s, const std::string& k, std::vector<double> def) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    std::vector<double> out;
    for (const auto& item : detail::split_list(e->value)) out.push_back(parse_number<double>({item, e->line}, s, k, "a number list"));
    return out;
  }

  /// Maps a string value through `parse`, attaching the location to any ConfigError.
  template <class T, class Parse>
  T get_enum(const std::string& s, const std::string& k, T def, Parse&& parse) {
    const IniEntry* e = find(s, k);
    if (!e) return def;
    try {
      return parse(e->value);
    } catch (const ConfigError& ex) {
      error(*e, s, k, ex.what());
    }
  }

  /// Throws for the first key (in file order) that nothing has read.
  void finish() const {
    const IniEntry* worst = nullptr;
    std::string where;
    for (const auto& [sec, keys] : doc_.sections)
      for (const auto& [key, entry] : keys)
        if (!used_.count(sec + "\n" + key) && (!worst || entry.line < worst->line)) {
          worst = &entry;
          where = "unknown key '" + key + "' in [" + sec + "]";
        }
    if (worst) throw ConfigError(doc_.source + ":" + std::to_string(worst->line) + ": " + where);
  }

  /// Location prefix for diagnostics about a value that parsed but is invalid.
  std::string where(const std::string& s, const std::string& k) const {
    const auto it = doc_.sections.find(s);
    if (it != doc_.sections.end()) {
      const auto kt = it->second.find(k);
      if (kt != it->second.end()) return doc_.source + ":" + std::to_string(kt->second.line) + ": ";
    }
    return doc_.source + ": ";
  }

 private:
  const IniEntry* find(const std::string& s, const std::string& k) {
    used_.insert(s + "\n" + k);
    const auto it = doc_.sections.find(s);
    if (it == doc_.sections.end()) return nullptr;
    const auto kt = it->second.find(k);
    return kt == it->second.end() ? nullptr : &kt->second;
  }

  [[noreturn]] void error(const IniEntry& e, const std::string& s, const std::string& k, const std::string& msg) const {
    throw ConfigError(doc_.source + ":" + std::to_string(e.line) + ": [" + s + "] " + k + ": " + msg);
  }

  template <class T>
  T parse_number(const IniEntry& e, const std::string& s, const std::string& k, const char* what) const {
    T v{};
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || e.value.empty())
      error(e, s, k, std::string("expected ") + what + ", got '" + e.value + "'");
    if constexpr (std::is_floating_point_v<T>)
      if (!std::isfinite(v)) error(e, s, k, "value must be finite");
    return v;
  }

  IniDocument doc_;
  std::set<std::string> used_;
};

inline LoadModel load_model_from_string(const std::string& s) {
  if (s == "l1" || s == "L1") return LoadModel::l1;
  if (s == "l2" || s == "L2") return LoadModel::l2;
  if (s == "l3" || s == "L3") return LoadModel::l3;
  throw ConfigError("unknown load model '" + s + "' (expected l1, l2 or l3)");
}

inline FaultKind fault_kind_from_string(const std::string& s) {
  for (auto k : {FaultKind::none, FaultKind::concentrated, FaultKind::distributed, FaultKind::termination_change,
                 FaultKind::incipient})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown fault kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Run configuration

struct IoConfig {
  std::string dataset;         // wide panel CSV
  std::string dataset_format = "wide";  // wide | long
  std::string models;          // directory of model files and the stats file
  std::string target_dataset;  // transfer target (wide CSV); generated from [transfer] when empty
};

struct DetectorConfig {
  double p_fa = 0.01;
  ThresholdMode mode = ThresholdMode::theoretical;
  double ridge = -1.0;  // < 0: 1e-6 trace(sigma) / dim
};

struct RocRunConfig {
  std::size_t trials = 20;
  std::uint64_t seed_base = 0;
  double days = 20;
  double onset_day = 10;
  double train_days = 8;
  std::size_t span = 1;
  std::vector<std::string> predictors{"arima", "baseline"};
  std::vector<double> severities;  // distributed-fault sweep; empty: the [fault] section alone
  bool include_healthy = true;
};

struct BenchmarkRunConfig {
  std::vector<std::string> predictors{"baseline", "avg", "arima", "l2boost", "ffnn", "lstm"};
  std::vector<std::string> load_models{"l3"};
  std::size_t seeds = 1;
  double days = 30;
};

struct TransferRunConfig {
  LoadModel source_load = LoadModel::l3;
  LoadModel target_load = LoadModel::l1;
  double source_days = 20;
  double target_days = 20;
  std::uint64_t target_seed_offset = 1;
};

struct IncipientRunConfig {
  double days = 132;
  double onset_day = 66;
  std::vector<double> p_fa_grid{0.001, 0.005, 0.01, 0.05};
  double train_fraction = 0.8;
  std::size_t permutations = 2000;
};

struct RunConfig {
  Scenario scenario;
  PredictorConfig predictor;
  std::size_t n_batches = 9;
  double train_fraction = 0.8;
  DetectorConfig detector;
  IoConfig io;
  RocRunConfig roc;
  BenchmarkRunConfig benchmark;
  TransferRunConfig transfer;
  IncipientRunConfig incipient;
};

inline std::size_t days_to_samples(double days) {
  if (!(days > 0)) throw ConfigError("durations in days must be > 0");
  return static_cast<std::size_t>(std::llround(days * static_cast<double>(kSamplesPerDay)));
}

namespace detail {

inline std::vector<Harmonic> parse_harmonics(const std::string& s) {
  // order:sine:cosine; order:sine:cosine; ...
  std::vector<Harmonic> out;
  for (const auto& item : split_list(s, ';')) {
    const auto parts = split_list(item, ':');
    if (parts.size() != 3) throw ConfigError("harmonic '" + item + "' must be order:sine_amp:cosine_amp");
    Harmonic h;
    try {
      h.order = std::stoi(parts[0]);
      h.sine_amp = std::stod(parts[1]);
      h.cosine_amp = std::stod(parts[2]);
    } catch (const std::exception&) {
      throw ConfigError("harmonic '" + item + "' has a non-numeric field");
    }
    out.push_back(h);
  }
  return out;
}

inline ArimaOrder parse_order(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 3) throw ConfigError("arima_order must be 'p, d, q'");
  ArimaOrder o;
  try {
    o = {std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])};
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("arima_order: ") + e.what());
  }
  return o;
}

}  // namespace detail

/// Reads every known section; unknown keys are reported by finish().
inline RunConfig read_run_config(ConfigReader& r) {
  RunConfig c;
  Scenario& sc = c.scenario;

  sc.n_samples = days_to_samples(r.get_double("scenario", "days", 664));
  if (r.has("scenario", "samples")) sc.n_samples = r.get_count("scenario", "samples", sc.n_samples);
  sc.load_model = r.get_enum("scenario", "load_model", sc.load_model, load_model_from_string);
  sc.seed = r.get_u64("scenario", "seed", sc.seed);

  auto& t = sc.topology;
  t.trunk_tx_to_tee_m = r.get_double("topology", "trunk_tx_to_tee_m", t.trunk_tx_to_tee_m);
  t.tee_to_rx_m = r.get_double("topology", "tee_to_rx_m", t.tee_to_rx_m);
  t.branch_m = r.get_double("topology", "branch_m", t.branch_m);
  t.tx_impedance = {r.get_double("topology", "tx_resistance_ohm", t.tx_impedance.real()),
                    r.get_double("topology", "tx_reactance_ohm", t.tx_impedance.imag())};
  t.rx_impedance = {r.get_double("topology", "rx_resistance_ohm", t.rx_impedance.real()),
                    r.get_double("topology", "rx_reactance_ohm", t.rx_impedance.imag())};

  auto& cb = sc.cable;
  cb.r0_ohm_per_m = r.get_double("cable", "r0_ohm_per_m", cb.r0_ohm_per_m);
  cb.r_ref_hz = r.get_double("cable", "r_ref_hz", cb.r_ref_hz);
  cb.l_h_per_m = r.get_double("cable", "l_h_per_m", cb.l_h_per_m);
  cb.c_f_per_m = r.get_double("cable", "c_f_per_m", cb.c_f_per_m);
  cb.tan_delta = r.get_double("cable", "tan_delta", cb.tan_delta);

  auto& b = sc.band;
  b.n_subcarriers = r.get_count("band", "n_subcarriers", b.n_subcarriers);
  b.spacing_hz = r.get_double("band", "spacing_hz", b.spacing_hz);
  b.start_hz = r.get_double("band", "start_hz", b.start_hz);
  b.tx_psd_dbm_per_hz = r.get_double("band", "tx_psd_dbm_per_hz", b.tx_psd_dbm_per_hz);
  b.noise_psd_dbm_per_hz = r.get_double("band", "noise_psd_dbm_per_hz", b.noise_psd_dbm_per_hz);
  b.noise_slope_db_per_mhz = r.get_double("band", "noise_slope_db_per_mhz", b.noise_slope_db_per_mhz);
  b.perturbation_variance_db2 = r.get_double("band", "perturbation_variance_db2", b.perturbation_variance_db2);

  auto& pr = sc.profile;
  pr.fundamental_period = r.get_count("profile", "fundamental_period", pr.fundamental_period);
  pr.offset = {r.get_double("profile", "offset_real_ohm", pr.offset.real()),
               r.get_double("profile", "offset_imag_ohm", pr.offset.imag())};
  pr.harmonics = r.get_enum("profile", "harmonics", pr.harmonics, detail::parse_harmonics);

  auto& sh = sc.shocks;
  sh.real_low = r.get_double("shocks", "real_low", sh.real_low);
  sh.real_high = r.get_double("shocks", "real_high", sh.real_high);
  sh.imag_low = r.get_double("shocks", "imag_low", sh.imag_low);
  sh.imag_high = r.get_double("shocks", "imag_high", sh.imag_high);

  auto& f = sc.fault;
  f.kind = r.get_enum("fault", "kind", f.kind, fault_kind_from_string);
  f.onset_index = r.get_count("fault", "onset_index", f.onset_index);
  f.location_m = r.get_double("fault", "location_m", f.location_m);
  f.extent_m = r.get_double("fault", "extent_m", f.extent_m);
  f.fault_resistance_ohm = r.get_double("fault", "fault_resistance_ohm", f.fault_resistance_ohm);
  f.severity_fraction = r.get_double("fault", "severity_fraction", f.severity_fraction);
  f.ramp_end_index = r.get_count("fault", "ramp_end_index", f.ramp_end_index);
  f.peak_scale = r.get_double("fault", "peak_scale", f.peak_scale);
  f.switch_duration_samples = r.get_count("fault", "switch_duration_samples", f.switch_duration_samples);
  f.switch_to = r.get_enum("fault", "switch_to", f.switch_to, load_model_from_string);

  auto& p = c.predictor;
  p.kind = r.get_enum("predictor", "kind", p.kind, predictor_kind_from_string);
  p.window = r.get_count("predictor", "window", p.window);
  p.arima_order = r.get_enum("predictor", "arima_order", p.arima_order, detail::parse_order);
  p.arima_select = r.get_bool("predictor", "arima_select", p.arima_select);
  p.arima_validation_fraction = r.get_double("predictor", "arima_validation_fraction", p.arima_validation_fraction);
  p.boost.k_total = static_cast<int>(r.get_int("predictor", "k_total", p.boost.k_total));
  p.boost.shrinkage = r.get_double("predictor", "shrinkage", p.boost.shrinkage);
  p.net.optimizer = r.get_enum("predictor", "optimizer", p.net.optimizer, optimizer_from_string);
  p.net.learning_rate = r.get_double("predictor", "learning_rate", p.net.learning_rate);
  p.net.momentum = r.get_double("predictor", "momentum", p.net.momentum);
  p.net.epochs = static_cast<int>(r.get_int("predictor", "epochs", p.net.epochs));
  p.net.batch_size = r.get_count("predictor", "batch_size", p.net.batch_size);
  p.net.validation_fraction = r.get_double("predictor", "validation_fraction", p.net.validation_fraction);
  p.net.patience = static_cast<int>(r.get_int("predictor", "patience", p.net.patience));
  p.net.seed = r.get_u64("predictor", "seed", p.net.seed);

  c.n_batches = r.get_count("pipeline", "n_batches", c.n_batches);
  c.train_fraction = r.get_double("pipeline", "train_fraction", c.train_fraction);

  c.detector.p_fa = r.get_double("detector", "p_fa", c.detector.p_fa);
  c.detector.mode = r.get_enum("detector", "threshold_mode", c.detector.mode, threshold_mode_from_string);
  c.detector.ridge = r.get_double("detector", "ridge", c.detector.ridge);

  c.io.dataset = r.get_string("io", "dataset", c.io.dataset);
  c.io.dataset_format = r.get_string("io", "dataset_format", c.io.dataset_format);
  c.io.models = r.get_string("io", "models", c.io.models);
  c.io.target_dataset = r.get_string("io", "target_dataset", c.io.target_dataset);

  c.roc.trials = r.get_count("roc", "trials", c.roc.trials);
  c.roc.seed_base = r.get_u64("roc", "seed_base", c.roc.seed_base);
  c.roc.days = r.get_double("roc", "days", c.roc.days);
  c.roc.onset_day = r.get_double("roc", "onset_day", c.roc.onset_day);
  c.roc.train_days = r.get_double("roc", "train_days", c.roc.train_days);
  c.roc.span = r.get_count("roc", "span", c.roc.span);
  c.roc.predictors = r.get_list("roc", "predictors", c.roc.predictors);
  c.roc.severities = r.get_double_list("roc", "severities", c.roc.severities);
  c.roc.include_healthy = r.get_bool("roc", "include_healthy", c.roc.include_healthy);

  c.benchmark.predictors = r.get_list("benchmark", "predictors", c.benchmark.predictors);
  c.benchmark.load_models = r.get_list("benchmark", "load_models", c.benchmark.load_models);
  c.benchmark.seeds = r.get_count("benchmark", "seeds", c.benchmark.seeds);
  c.benchmark.days = r.get_double("benchmark", "days", c.benchmark.days);

  c.transfer.source_load = r.get_enum("transfer", "source_load_model", c.transfer.source_load, load_model_from_string);
  c.transfer.target_load = r.get_enum("transfer", "target_load_model", c.transfer.target_load, load_model_from_string);
  c.transfer.source_days = r.get_double("transfer", "source_days", c.transfer.source_days);
  c.transfer.target_days = r.get_double("transfer", "target_days", c.transfer.target_days);
  c.transfer.target_seed_offset = r.get_u64("transfer", "target_seed_offset", c.transfer.target_seed_offset);

  c.incipient.days = r.get_double("incipient", "days", c.incipient.days);
  c.incipient.onset_day = r.get_double("incipient", "onset_day", c.incipient.onset_day);
  c.incipient.p_fa_grid = r.get_double_list("incipient", "p_fa_grid", c.incipient.p_fa_grid);
  c.incipient.train_fraction = r.get_double("incipient", "train_fraction", c.incipient.train_fraction);
  c.incipient.permutations = r.get_count("incipient", "permutations", c.incipient.permutations);

  auto invalid = [&](const std::string& s, const std::string& k, const std::string& msg) {
    throw ConfigError(r.where(s, k) + "[" + s + "] " + k + ": " + msg);
  };
  if (c.n_batches < 1) invalid("pipeline", "n_batches", "must be >= 1");
  if (!(c.train_fraction > 0 && c.train_fraction < 1)) invalid("pipeline", "train_fraction", "must lie in (0, 1)");
  if (!(c.detector.p_fa > 0 && c.detector.p_fa < 1)) invalid("detector", "p_fa", "must lie in (0, 1)");
  if (c.io.dataset_format != "wide" && c.io.dataset_format != "long")
    invalid("io", "dataset_format", "must be wide or long");
  if (p.window < 1) invalid("predictor", "window", "must be >= 1");
  try {
    p.boost.validate();
  } catch (const std::invalid_argument& e) {
    invalid("predictor", "k_total", e.what());
  }
  try {
    p.net.validate();
  } catch (const std::invalid_argument& e) {
    invalid("predictor", "learning_rate", e.what());
  }
  try {
    sc.profile.validate();
    sc.shocks.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where("profile", "harmonics") + e.what());
  }
  return c;
}

/// Reads an INI file, or the "config" member of a JSON manifest.
inline IniDocument load_config_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": invalid JSON manifest: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_string()) throw ConfigError(path + ": manifest has no 'config' text");
    return parse_ini_text(j["config"].get<std::string>(), path + "#config");
  }
  return parse_ini_text(text, path);
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

inline std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace detail

/// Canonical INI text of a configuration; read_run_config(to_ini(c)) == c.
inline std::string to_ini(const RunConfig& c) {
  using detail::fmt_double;
  std::ostringstream o;
  const Scenario& sc = c.scenario;
  o << "[scenario]\nsamples = " << sc.n_samples << "\nload_model = " << detail::lower(to_string(sc.load_model))
    << "\nseed = " << sc.seed << "\n\n";
  const auto& t = sc.topology;
  o << "[topology]\ntrunk_tx_to_tee_m = " << fmt_double(t.trunk_tx_to_tee_m) << "\ntee_to_rx_m = "
    << fmt_double(t.tee_to_rx_m) << "\nbranch_m = " << fmt_double(t.branch_m) << "\ntx_resistance_ohm = "
    << fmt_double(t.tx_impedance.real()) << "\ntx_reactance_ohm = " << fmt_double(t.tx_impedance.imag())
    << "\nrx_resistance_ohm = " << fmt_double(t.rx_impedance.real()) << "\nrx_reactance_ohm = "
    << fmt_double(t.rx_impedance.imag()) << "\n\n";
  const auto& cb = sc.cable;
  o << "[cable]\nr0_ohm_per_m = " << fmt_double(cb.r0_ohm_per_m) << "\nr_ref_hz = " << fmt_double(cb.r_ref_hz)
    << "\nl_h_per_m = " << fmt_double(cb.l_h_per_m) << "\nc_f_per_m = " << fmt_double(cb.c_f_per_m)
    << "\ntan_delta = " << fmt_double(cb.tan_delta) << "\n\n";
  const auto& b = sc.band;
  o << "[band]\nn_subcarriers = " << b.n_subcarriers << "\nspacing_hz = " << fmt_double(b.spacing_hz)
    << "\nstart_hz = " << fmt_double(b.start_hz) << "\ntx_psd_dbm_per_hz = " << fmt_double(b.tx_psd_dbm_per_hz)
    << "\nnoise_psd_dbm_per_hz = " << fmt_double(b.noise_psd_dbm_per_hz)
    << "\nnoise_slope_db_per_mhz = " << fmt_double(b.noise_slope_db_per_mhz)
    << "\nperturbation_variance_db2 = " << fmt_double(b.perturbation_variance_db2) << "\n\n";
  const auto& pr = sc.profile;
  o << "[profile]\nfundamental_period = " << pr.fundamental_period << "\noffset_real_ohm = "
    << fmt_double(pr.offset.real()) << "\noffset_imag_ohm = " << fmt_double(pr.offset.imag()) << "\nharmonics = ";
  for (std::size_t i = 0; i < pr.harmonics.size(); ++i)
    o << (i ? "; " : "") << pr.harmonics[i].order << ":" << fmt_double(pr.harmonics[i].sine_amp) << ":"
      << fmt_double(pr.harmonics[i].cosine_amp);
  o << "\n\n";
  const auto& sh = sc.shocks;
  o << "[shocks]\nreal_low = " << fmt_double(sh.real_low) << "\nreal_high = " << fmt_double(sh.real_high)
    << "\nimag_low = " << fmt_double(sh.imag_low) << "\nimag_high = " << fmt_double(sh.imag_high) << "\n\n";
  const auto& f = sc.fault;
  o << "[fault]\nkind = " << to_string(f.kind) << "\nonset_index = " << f.onset_index << "\nlocation_m = "
    << fmt_double(f.location_m) << "\nextent_m = " << fmt_double(f.extent_m) << "\nfault_resistance_ohm = "
    << fmt_double(f.fault_resistance_ohm) << "\nseverity_fraction = " << fmt_double(f.severity_fraction)
    << "\nramp_end_index = " << f.ramp_end_index << "\npeak_scale = " << fmt_double(f.peak_scale)
    << "\nswitch_duration_samples = " << f.switch_duration_samples << "\nswitch_to = "
    << detail::lower(to_string(f.switch_to)) << "\n\n";
  const auto& p = c.predictor;
  o << "[predictor]\nkind = " << to_string(p.kind) << "\nwindow = " << p.window << "\narima_order = "
    << p.arima_order.p << ", " << p.arima_order.d << ", " << p.arima_order.q
    << "\narima_select = " << (p.arima_select ? "true" : "false")
    << "\narima_validation_fraction = " << fmt_double(p.arima_validation_fraction) << "\nk_total = " << p.boost.k_total
    << "\nshrinkage = " << fmt_double(p.boost.shrinkage) << "\noptimizer = " << to_string(p.net.optimizer)
    << "\nlearning_rate = " << fmt_double(p.net.learning_rate) << "\nmomentum = " << fmt_double(p.net.momentum)
    << "\nepochs = " << p.net.epochs << "\nbatch_size = " << p.net.batch_size
    << "\nvalidation_fraction = " << fmt_double(p.net.validation_fraction) << "\npatience = " << p.net.patience
    << "\nseed = " << p.net.seed << "\n\n";
  o << "[pipeline]\nn_batches = " << c.n_batches << "\ntrain_fraction = " << fmt_double(c.train_fraction) << "\n\n";
  o << "[detector]\np_fa = " << fmt_double(c.detector.p_fa) << "\nthreshold_mode = " << to_string(c.detector.mode)
    << "\nridge = " << fmt_double(c.detector.ridge) << "\n\n";
  o << "[io]\ndataset = " << c.io.dataset << "\ndataset_format = " << c.io.dataset_format << "\nmodels = " << c.io.models
    << "\ntarget_dataset = " << c.io.target_dataset << "\n\n";
  o << "[roc]\ntrials = " << c.roc.trials << "\nseed_base = " << c.roc.seed_base << "\ndays = " << fmt_double(c.roc.days)
    << "\nonset_day = " << fmt_double(c.roc.onset_day) << "\ntrain_days = " << fmt_double(c.roc.train_days)
    << "\nspan = " << c.roc.span << "\npredictors = " << detail::join(c.roc.predictors)
    << "\nseverities = " << detail::join(c.roc.severities)
    << "\ninclude_healthy = " << (c.roc.include_healthy ? "true" : "false") << "\n\n";
  o << "[benchmark]\npredictors = " << detail::join(c.benchmark.predictors)
    << "\nload_models = " << detail::join(c.benchmark.load_models) << "\nseeds = " << c.benchmark.seeds
    << "\ndays = " << fmt_double(c.benchmark.days) << "\n\n";
  o << "[transfer]\nsource_load_model = " << detail::lower(to_string(c.transfer.source_load))
    << "\ntarget_load_model = " << detail::lower(to_string(c.transfer.target_load))
    << "\nsource_days = " << fmt_double(c.transfer.source_days) << "\ntarget_days = "
    << fmt_double(c.transfer.target_days) << "\ntarget_seed_offset = " << c.transfer.target_seed_offset << "\n\n";
  o << "[incipient]\ndays = " << fmt_double(c.incipient.days) << "\nonset_day = " << fmt_double(c.incipient.onset_day)
    << "\np_fa_grid = " << detail::join(c.incipient.p_fa_grid) << "\ntrain_fraction = "
    << fmt_double(c.incipient.train_fraction) << "\npermutations = " << c.incipient.permutations << "\n";
  return o.str();
}

}  // namespace plcmon
