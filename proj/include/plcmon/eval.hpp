#pragma once

// Experiment harness: predictor benchmark, ROC over repeated fault trials,
// train-on-one/test-on-another transfer and incipient-fault trend analysis.
//
// ROC scoring. The detector of a trial is trained on the healthy prefix
// [0, n_tr). A score is the maximum SMD over a block of `span` consecutive
// samples. The healthy test span [n_tr, onset) is cut into non-overlapping
// blocks, each giving one negative score; the block starting at onset gives the
// trial's positive score. With span = 1 false alarms are counted per sample.
// An alarm is score > threshold, so p_dt is the fraction of trials detected and
// p_fa the fraction of healthy blocks alarmed.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "plcmon/emulator.hpp"
#include "plcmon/pipeline.hpp"

namespace plcmon {

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double threshold = 0.0;
  double p_fa = 0.0;
  double p_dt = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // p_fa and p_dt nondecreasing
  double auc = 0.0;
  std::size_t trial_count = 0;
};

/// Empirical ROC of positive vs negative scores swept over every distinct
/// score, from threshold +inf (0, 0) down to threshold 0. AUC by trapezoid rule.
inline RocCurve roc_from_scores(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) throw std::invalid_argument("roc: need positive and negative scores");
  std::vector<std::pair<double, bool>> all;
  all.reserve(positive.size() + negative.size());
  for (double s : positive) all.emplace_back(s, true);
  for (double s : negative) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve c;
  c.trial_count = positive.size();
  const auto np = static_cast<double>(positive.size());
  const auto nn = static_cast<double>(negative.size());
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < all.size();) {
    const double v = all[k].first;
    while (k < all.size() && all[k].first == v) {
      (all[k].second ? tp : fp) += 1;
      ++k;
    }
    // Largest threshold that alarms on everything >= v.
    const double next = k < all.size() ? all[k].first : std::min(0.0, v);
    c.points.push_back({std::max(next, 0.0), static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
  }
  if (c.points.back().p_fa < 1.0 || c.points.back().p_dt < 1.0) c.points.push_back({0.0, 1.0, 1.0});
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    const auto& a = c.points[k - 1];
    const auto& b = c.points[k];
    c.auc += (b.p_fa - a.p_fa) * 0.5 * (a.p_dt + b.p_dt);
  }
  return c;
}

/// P(positive > negative) + 0.5 P(tie); equals the trapezoid AUC.
inline double auc_mann_whitney(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) throw std::invalid_argument("auc: need positive and negative scores");
  std::vector<double> neg(negative.begin(), negative.end());
  std::sort(neg.begin(), neg.end());
  double acc = 0.0;
  for (double p : positive) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(neg.begin(), neg.end(), p);
    acc += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return acc / (static_cast<double>(positive.size()) * static_cast<double>(negative.size()));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sequence");
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  if (v.size() % 2 == 1) return v[m];
  const double hi = v[m];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

/// Maximum over [begin, begin + span) clipped to the sequence.
inline double block_max(std::span<const double> x, std::size_t begin, std::size_t span) {
  const std::size_t end = std::min(x.size(), begin + span);
  if (begin >= end) throw std::out_of_range("block_max: empty block");
  return *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(begin), x.begin() + static_cast<std::ptrdiff_t>(end));
}

// ---------------------------------------------------------------------------
// Repeated fault trials

struct RocSpec {
  Scenario base;  // healthy template; base.fault is ignored
  PredictorConfig predictor;
  std::size_t n_batches = 9;
  std::size_t n_samples = 20 * kSamplesPerDay;
  std::size_t onset_index = 10 * kSamplesPerDay;
  std::size_t n_tr = 8 * kSamplesPerDay;
  std::size_t trials = 20;
  std::uint64_t seed_base = 0;
  std::size_t span = 1;
  double p_fa = 0.01;  // operating point for the first-alarm statistics
  ThresholdMode mode = ThresholdMode::theoretical;
  double ridge = -1.0;

  void validate() const {
    if (trials < 1) throw ConfigError("roc: trials must be >= 1");
    if (span < 1) throw ConfigError("roc: span must be >= 1");
    if (!(n_tr < onset_index && onset_index + span <= n_samples))
      throw ConfigError("roc: need n_tr < onset and onset + span <= n_samples");
    if (onset_index - n_tr < span) throw ConfigError("roc: healthy test span shorter than one block");
    check_p_fa(p_fa);
  }

  std::uint64_t trial_seed(std::size_t t) const { return mix_seed(seed_base, t); }
};

struct TrialOutcome {
  std::uint64_t seed = 0;
  double positive_score = 0.0;
  std::vector<double> negative_scores;
  double auc = 0.0;                        // this trial's positive vs its own negatives
  std::optional<std::size_t> first_alarm;  // first alarm at or after onset, at (p_fa, mode)
  double threshold = 0.0;                  // at (p_fa, mode)
  double healthy_alarm_rate = 0.0;         // per-sample alarm rate on [n_tr, onset) at (p_fa, mode)
};

struct RocResult {
  std::string label;
  FaultSpec fault;
  RocCurve curve;
  std::vector<TrialOutcome> trials;

  std::vector<double> trial_aucs() const {
    std::vector<double> v;
    for (const auto& t : trials) v.push_back(t.auc);
    return v;
  }
  double median_trial_auc() const { return median(trial_aucs()); }
  /// Trials whose first alarm at or after onset lies within `samples` of onset.
  std::size_t detected_within(std::size_t onset, std::size_t samples) const {
    std::size_t n = 0;
    for (const auto& t : trials)
      if (t.first_alarm && *t.first_alarm - onset <= samples) ++n;
    return n;
  }
};

/// Runs every fault variant on the same trials. Per trial the healthy dataset
/// and its detector are shared across variants (data before onset is
/// identical). A variant of kind `none` scores healthy data against itself.
inline std::vector<RocResult> run_roc_variants(const RocSpec& spec, const std::vector<std::pair<std::string, FaultSpec>>& variants) {
  spec.validate();
  std::vector<RocResult> results(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    results[v].label = variants[v].first;
    results[v].fault = variants[v].second;
    results[v].fault.onset_index = spec.onset_index;
  }
  for (std::size_t t = 0; t < spec.trials; ++t) {
    Scenario healthy = spec.base;
    healthy.fault = FaultSpec{};
    healthy.n_samples = spec.n_samples;
    healthy.seed = spec.trial_seed(t);
    const BatchSeries hdata = generate_batch_series(healthy, spec.n_batches);
    const TrainedDetector det = train_detector(hdata, spec.predictor, spec.n_tr, spec.ridge);
    const double thr = det.threshold(spec.p_fa, spec.mode);

    const Matrix herr = prediction_errors(det.models, hdata, spec.n_tr, spec.onset_index);
    const auto hsmd = smd_series(det.stats, herr);
    std::vector<double> negatives;
    for (std::size_t b = 0; b + spec.span <= hsmd.size(); b += spec.span) negatives.push_back(block_max(hsmd, b, spec.span));
    const auto healthy_alarms = std::count_if(hsmd.begin(), hsmd.end(), [&](double d) { return d > thr; });

    for (std::size_t v = 0; v < variants.size(); ++v) {
      Scenario sc = healthy;
      sc.fault = results[v].fault;
      const bool faulty = sc.fault.kind != FaultKind::none;
      const BatchSeries fdata = faulty ? generate_batch_series(sc, spec.n_batches) : BatchSeries{};
      const BatchSeries& data = faulty ? fdata : hdata;
      const Matrix ferr = prediction_errors(det.models, data, spec.onset_index, spec.n_samples);
      const auto fsmd = smd_series(det.stats, ferr);

      TrialOutcome out;
      out.seed = healthy.seed;
      out.positive_score = block_max(fsmd, 0, spec.span);
      out.negative_scores = negatives;
      out.auc = auc_mann_whitney(std::span(&out.positive_score, 1), negatives);
      out.threshold = thr;
      out.healthy_alarm_rate = static_cast<double>(healthy_alarms) / static_cast<double>(hsmd.size());
      for (std::size_t k = 0; k < fsmd.size(); ++k)
        if (fsmd[k] > thr) {
          out.first_alarm = spec.onset_index + k;
          break;
        }
      results[v].trials.push_back(std::move(out));
    }
  }
  for (auto& r : results) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& t : r.trials) {
      pos.push_back(t.positive_score);
      neg.insert(neg.end(), t.negative_scores.begin(), t.negative_scores.end());
    }
    r.curve = roc_from_scores(pos, neg);
  }
  return results;
}

inline RocResult run_roc(const RocSpec& spec, const FaultSpec& fault) {
  return run_roc_variants(spec, {{to_string(fault.kind), fault}}).front();
}

// ---------------------------------------------------------------------------
// Predictor benchmark

struct NamedPredictor {
  std::string name;
  PredictorConfig config;
};

struct NamedDataset {
  std::string name;
  BatchSeries data;
};

struct BenchmarkCell {
  std::string dataset;
  std::string predictor;
  std::optional<double> nrmse;  // mean over batches of the per-batch normalized RMSE
  std::vector<double> per_batch;
  std::string error;            // fit failure message when nrmse is empty
};

/// Fits each predictor on the first train_fraction of every batch series and
/// scores one-step forecasts on the remainder. Failures are recorded per cell.
inline std::vector<BenchmarkCell> run_predictor_benchmark(const std::vector<NamedDataset>& datasets,
                                                          const std::vector<NamedPredictor>& predictors,
                                                          double train_fraction = 0.8) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("benchmark: train_fraction must lie in (0, 1)");
  std::vector<BenchmarkCell> cells;
  for (const auto& ds : datasets) {
    const auto n = ds.data.n_samples();
    const auto n_tr = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    for (const auto& p : predictors) {
      BenchmarkCell cell{ds.name, p.name, std::nullopt, {}, {}};
      try {
        if (n_tr <= p.config.window || n_tr >= n) throw DataError("dataset too short for the window");
        for (const auto& s : ds.data.series) {
          const std::span<const double> all(s);
          const auto model = fit_predictor(p.config, all.first(n_tr));
          cell.per_batch.push_back(normalized_rmse(all.subspan(n_tr), predict_series(*model, all, n_tr)));
        }
        cell.nrmse = std::accumulate(cell.per_batch.begin(), cell.per_batch.end(), 0.0) /
                     static_cast<double>(cell.per_batch.size());
      } catch (const std::exception& e) {
        cell.per_batch.clear();
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Transfer

struct TransferConfig {
  double train_fraction = 0.8;  // of the source series
  double p_fa = 0.01;
  ThresholdMode mode = ThresholdMode::theoretical;
  double ridge = -1.0;
};

struct TransferResult {
  TrainedDetector detector;
  DetectionReport report;  // over target samples [w, N)
};

inline TransferResult run_transfer(const BatchSeries& source, const BatchSeries& target, const PredictorConfig& predictor,
                                   const TransferConfig& cfg = {}) {
  if (source.n_batches() != target.n_batches() || source.bounds != target.bounds)
    throw DataError("transfer: source and target batch configurations differ");
  const auto n_tr = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(source.n_samples())));
  TransferResult r;
  r.detector = train_detector(source, predictor, n_tr, cfg.ridge);
  r.report = run_detection(r.detector, target, r.detector.window, target.n_samples(), cfg.p_fa, cfg.mode);
  return r;
}

// ---------------------------------------------------------------------------
// Trend statistics

/// Median of pairwise slopes (y_j - y_i) / (x_j - x_i), i < j, x_i != x_j.
inline double theil_sen_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("theil_sen: need >= 2 paired points");
  std::vector<double> slopes;
  slopes.reserve(x.size() * (x.size() - 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
  return median(std::move(slopes));
}

struct TrendTest {
  double slope = 0.0;
  double p_value = 1.0;  // one-sided, H1: slope > 0
};

/// Theil-Sen slope and its permutation p-value (1 + #{perm slope >= observed}) / (1 + permutations).
inline TrendTest theil_sen_trend_test(std::span<const double> x, std::span<const double> y, std::size_t permutations,
                                      std::uint64_t seed) {
  TrendTest t;
  t.slope = theil_sen_slope(x, y);
  std::vector<double> perm(y.begin(), y.end());
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t b = 0; b < permutations; ++b) {
    std::shuffle(perm.begin(), perm.end(), rng);
    if (theil_sen_slope(x, perm) >= t.slope) ++hits;
  }
  t.p_value = static_cast<double>(1 + hits) / static_cast<double>(1 + permutations);
  return t;
}

// ---------------------------------------------------------------------------
// Incipient fault

struct IncipientSpec {
  Scenario scenario;  // with an incipient fault
  PredictorConfig predictor;
  std::size_t n_batches = 9;
  double train_fraction = 0.8;  // of the healthy prefix [0, onset)
  std::vector<double> p_fa_grid{0.001, 0.005, 0.01, 0.05};
  ThresholdMode mode = ThresholdMode::theoretical;
  double ridge = -1.0;
  std::size_t permutations = 2000;

  void validate() const {
    scenario.validate();
    if (scenario.fault.kind != FaultKind::incipient) throw ConfigError("incipient: scenario fault must be incipient");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("incipient: train_fraction must lie in (0, 1]");
    if (p_fa_grid.empty()) throw ConfigError("incipient: empty p_fa grid");
    for (double p : p_fa_grid) check_p_fa(p);
  }
};

struct IncipientPoint {
  double p_fa = 0.0;
  double threshold = 0.0;
  std::optional<std::size_t> first_alarm;  // at or after onset
  double post_onset_alarm_rate = 0.0;
  double pre_onset_alarm_rate = 0.0;  // on the healthy test span [n_tr, onset)
};

struct IncipientResult {
  std::size_t onset = 0;
  std::size_t n_tr = 0;
  std::vector<double> smd;  // samples [n_tr, N)
  std::vector<double> daily_mean_smd;  // post-onset whole days
  TrendTest trend;
  std::vector<IncipientPoint> points;
};

/// Trains on the healthy prefix, then reports per-p_fa first alarms and a
/// Theil-Sen trend test on the daily means of the post-onset SMD.
inline IncipientResult run_incipient(const IncipientSpec& spec) {
  spec.validate();
  const Scenario& sc = spec.scenario;
  const BatchSeries data = generate_batch_series(sc, spec.n_batches);
  IncipientResult r;
  r.onset = sc.fault.onset_index;
  r.n_tr = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(r.onset)));
  const TrainedDetector det = train_detector(data, spec.predictor, r.n_tr, spec.ridge);
  const Matrix err = prediction_errors(det.models, data, r.n_tr, data.n_samples());
  r.smd = smd_series(det.stats, err);

  const std::size_t post = r.onset - r.n_tr;
  std::vector<double> days;
  for (std::size_t d = 0; post + (d + 1) * kSamplesPerDay <= r.smd.size(); ++d) {
    const auto b = r.smd.begin() + static_cast<std::ptrdiff_t>(post + d * kSamplesPerDay);
    r.daily_mean_smd.push_back(std::accumulate(b, b + kSamplesPerDay, 0.0) / kSamplesPerDay);
    days.push_back(static_cast<double>(d));
  }
  if (r.daily_mean_smd.size() >= 3)
    r.trend = theil_sen_trend_test(days, r.daily_mean_smd, spec.permutations, mix_seed(sc.seed, 0x7e57));

  for (double p : spec.p_fa_grid) {
    IncipientPoint pt;
    pt.p_fa = p;
    pt.threshold = det.threshold(p, spec.mode);
    std::size_t pre = 0;
    std::size_t after = 0;
    for (std::size_t k = 0; k < r.smd.size(); ++k) {
      if (!(r.smd[k] > pt.threshold)) continue;
      if (k < post) {
        ++pre;
      } else {
        ++after;
        if (!pt.first_alarm) pt.first_alarm = r.n_tr + k;
      }
    }
    pt.pre_onset_alarm_rate = post > 0 ? static_cast<double>(pre) / static_cast<double>(post) : 0.0;
    pt.post_onset_alarm_rate =
        r.smd.size() > post ? static_cast<double>(after) / static_cast<double>(r.smd.size() - post) : 0.0;
    r.points.push_back(pt);
  }
  return r;
}

}  // namespace plcmon
