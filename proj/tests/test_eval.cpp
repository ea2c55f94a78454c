#include <gtest/gtest.h>

#include <random>

#include "plcmon/eval.hpp"

using namespace plcmon;

namespace {

RocSpec small_roc_spec() {
  RocSpec s;
  s.predictor.kind = PredictorKind::baseline;
  s.predictor.window = 4;
  s.n_samples = 4 * kSamplesPerDay;
  s.onset_index = 2 * kSamplesPerDay;
  s.n_tr = kSamplesPerDay;
  s.trials = 3;
  s.seed_base = 11;
  return s;
}

FaultSpec concentrated() {
  FaultSpec f;
  f.kind = FaultKind::concentrated;
  f.location_m = 100.0;
  f.fault_resistance_ohm = 100.0;
  return f;
}

}  // namespace

TEST(Roc, EndpointsAndMonotone) {
  const std::vector<double> pos{3.0, 5.0, 1.0};
  const std::vector<double> neg{0.5, 2.0, 2.0, 4.0};
  const auto c = roc_from_scores(pos, neg);
  EXPECT_EQ(c.points.front().p_fa, 0.0);
  EXPECT_EQ(c.points.front().p_dt, 0.0);
  EXPECT_EQ(c.points.back().p_fa, 1.0);
  EXPECT_EQ(c.points.back().p_dt, 1.0);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_GE(c.points[k].p_fa, c.points[k - 1].p_fa);
    EXPECT_GE(c.points[k].p_dt, c.points[k - 1].p_dt);
    EXPECT_LE(c.points[k].threshold, c.points[k - 1].threshold);
  }
}

TEST(Roc, TrapezoidEqualsMannWhitneyWithTies) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 6);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> pos(7), neg(11);
    for (auto& v : pos) v = u(rng) + 1.0;
    for (auto& v : neg) v = u(rng);
    EXPECT_NEAR(roc_from_scores(pos, neg).auc, auc_mann_whitney(pos, neg), 1e-12);
  }
}

TEST(Roc, PerfectAndReversedSeparation) {
  const std::vector<double> lo{0.1, 0.2, 0.3};
  const std::vector<double> hi{1.0, 2.0};
  EXPECT_DOUBLE_EQ(roc_from_scores(hi, lo).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_from_scores(lo, hi).auc, 0.0);
  EXPECT_DOUBLE_EQ(auc_mann_whitney(std::vector<double>{1.0}, std::vector<double>{1.0}), 0.5);
  EXPECT_THROW(roc_from_scores(std::vector<double>{}, lo), std::invalid_argument);
}

TEST(Stats, MedianAndBlockMax) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
  const std::vector<double> x{1, 5, 2, 7, 3};
  EXPECT_EQ(block_max(x, 0, 2), 5.0);
  EXPECT_EQ(block_max(x, 3, 10), 7.0);
  EXPECT_THROW(block_max(x, 5, 1), std::out_of_range);
}

TEST(TheilSen, RecoversLinearSlopeWithOutliers) {
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x[i] = static_cast<double>(i);
    y[i] = 2.0 - 0.75 * x[i];
  }
  y[5] = 100.0;
  y[30] = -80.0;
  EXPECT_NEAR(theil_sen_slope(x, y), -0.75, 1e-12);
}

TEST(TheilSen, PermutationPValue) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> x(30), up(30), flat(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = static_cast<double>(i);
    up[i] = 0.5 * x[i] + n01(rng);
    flat[i] = n01(rng);
  }
  const auto t_up = theil_sen_trend_test(x, up, 999, 1);
  EXPECT_GT(t_up.slope, 0.3);
  EXPECT_DOUBLE_EQ(t_up.p_value, 1.0 / 1000.0);
  const auto t_flat = theil_sen_trend_test(x, flat, 999, 1);
  EXPECT_GT(t_flat.p_value, 0.01);
  EXPECT_EQ(theil_sen_trend_test(x, flat, 999, 1).p_value, t_flat.p_value);
}

TEST(RocTrials, ReproducibleAndDetectsConcentratedFault) {
  const auto spec = small_roc_spec();
  FaultSpec none;
  const auto a = run_roc_variants(spec, {{"concentrated", concentrated()}, {"healthy", none}});
  const auto b = run_roc_variants(spec, {{"concentrated", concentrated()}, {"healthy", none}});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].curve.auc, b[0].curve.auc);
  EXPECT_EQ(a[1].curve.auc, b[1].curve.auc);
  EXPECT_EQ(a[0].trials.size(), 3u);
  EXPECT_EQ(a[0].curve.auc, 1.0);
  EXPECT_EQ(a[0].detected_within(spec.onset_index, 2), 3u);
  // The healthy variant scores the first healthy sample after onset against the
  // healthy blocks, so the pooled AUC must stay away from the extremes.
  EXPECT_GT(a[1].curve.auc, 0.05);
  EXPECT_LT(a[1].curve.auc, 0.95);
  for (const auto& t : a[0].trials) EXPECT_EQ(t.negative_scores.size(), spec.onset_index - spec.n_tr);
}

TEST(RocTrials, RejectsInconsistentSpans) {
  auto spec = small_roc_spec();
  spec.n_tr = spec.onset_index;
  EXPECT_THROW(run_roc(spec, concentrated()), ConfigError);
  spec = small_roc_spec();
  spec.span = 0;
  EXPECT_THROW(run_roc(spec, concentrated()), ConfigError);
}

TEST(Benchmark, WhiteNoiseOracles) {
  // White noise: the windowed mean is close to the sample mean (nRMSE ~ 1) and
  // the last value doubles the error variance (nRMSE ~ sqrt 2).
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  BatchSeries bs = BatchSeries::empty(batch_bounds(1, 1));
  std::vector<double> white;
  for (int j = 0; j < 2000; ++j) white.push_back(n01(rng));
  for (double v : white) bs.append(std::vector<double>{v});
  PredictorConfig avg;
  avg.kind = PredictorKind::avg;
  avg.window = 50;
  PredictorConfig base;
  base.kind = PredictorKind::baseline;
  base.window = 50;
  const auto cells = run_predictor_benchmark({{"white", bs}}, {{"avg", avg}, {"baseline", base}});
  ASSERT_EQ(cells.size(), 2u);
  ASSERT_TRUE(cells[0].nrmse);
  ASSERT_TRUE(cells[1].nrmse);
  EXPECT_NEAR(*cells[0].nrmse, 1.0, 0.05);
  EXPECT_NEAR(*cells[1].nrmse, std::sqrt(2.0), 0.1);
}

TEST(Benchmark, RecordsFailurePerCell) {
  BatchSeries bs = BatchSeries::empty(batch_bounds(1, 1));
  for (int j = 0; j < 10; ++j) bs.append(std::vector<double>{static_cast<double>(j % 3)});
  PredictorConfig p;
  p.kind = PredictorKind::baseline;
  p.window = 96;
  const auto cells = run_predictor_benchmark({{"short", bs}}, {{"baseline", p}});
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_FALSE(cells[0].nrmse);
  EXPECT_FALSE(cells[0].error.empty());
}

TEST(Transfer, SelfTransferOnHealthyDataIsCalibrated) {
  Scenario sc;
  sc.n_samples = 6 * kSamplesPerDay;
  sc.seed = 21;
  const auto data = generate_batch_series(sc, 9);
  PredictorConfig p;
  p.kind = PredictorKind::baseline;
  p.window = 4;
  const auto r = run_transfer(data, data, p);
  EXPECT_EQ(r.report.index.front(), 4u);
  EXPECT_EQ(r.report.index.back(), data.n_samples() - 1);
  const double rate = static_cast<double>(r.report.alarm_count()) / static_cast<double>(r.report.smd.size());
  EXPECT_LT(rate, 0.05);
  const auto other = generate_batch_series(sc, 3);
  EXPECT_THROW(run_transfer(data, other, p), DataError);
}

TEST(Incipient, ZeroPeakGivesNoTrendAndThresholdOrdering) {
  IncipientSpec spec;
  spec.scenario.n_samples = 12 * kSamplesPerDay;
  spec.scenario.seed = 5;
  spec.scenario.fault.kind = FaultKind::incipient;
  spec.scenario.fault.onset_index = 4 * kSamplesPerDay;
  spec.scenario.fault.ramp_end_index = spec.scenario.n_samples;
  spec.scenario.fault.peak_scale = 0.0;
  spec.predictor.kind = PredictorKind::baseline;
  spec.predictor.window = 4;
  spec.permutations = 199;
  const auto r = run_incipient(spec);
  EXPECT_EQ(r.n_tr, static_cast<std::size_t>(0.8 * 4 * kSamplesPerDay));
  EXPECT_EQ(r.daily_mean_smd.size(), 8u);
  EXPECT_GT(r.trend.p_value, 0.01);
  ASSERT_EQ(r.points.size(), spec.p_fa_grid.size());
  for (std::size_t k = 1; k < r.points.size(); ++k) {
    EXPECT_LT(r.points[k].threshold, r.points[k - 1].threshold);
    if (r.points[k - 1].first_alarm) {
      ASSERT_TRUE(r.points[k].first_alarm);
      EXPECT_LE(*r.points[k].first_alarm, *r.points[k - 1].first_alarm);
    }
  }
  for (const auto& pt : r.points)
    if (pt.first_alarm) {
      EXPECT_GE(*pt.first_alarm, r.onset);
    }
}

TEST(Incipient, RequiresIncipientFault) {
  IncipientSpec spec;
  spec.scenario.n_samples = 4 * kSamplesPerDay;
  EXPECT_THROW(run_incipient(spec), ConfigError);
}
