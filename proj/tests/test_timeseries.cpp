#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "plcmon/timeseries.hpp"

using namespace plcmon;

TEST(Batching, NineBatchesOf917) {
  // 917 = 9 * 101 + 8: the first eight batches take one extra subcarrier.
  const auto b = batch_bounds(917, 9);
  ASSERT_EQ(b.size(), 9u);
  const std::vector<std::size_t> sizes{102, 102, 102, 102, 102, 102, 102, 102, 101};
  std::size_t next = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(b[i].size(), sizes[i]);
    EXPECT_EQ(b[i].begin, next);
    next = b[i].end;
  }
  EXPECT_EQ(next, 917u);
  EXPECT_THROW(batch_bounds(5, 6), std::invalid_argument);
  EXPECT_THROW(batch_bounds(5, 0), std::invalid_argument);
}

TEST(Batching, ConstantPanel) {
  SnrPanel p(10, 917);
  for (std::size_t j = 0; j < 10; ++j)
    for (auto& v : p.row(j)) v = 30.0;
  const auto bs = batch_average(p, 9);
  for (const auto& s : bs.series)
    for (double v : s) EXPECT_DOUBLE_EQ(v, 30.0);
}

TEST(Batching, MatchesIndexListOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01(20.0, 5.0);
  SnrPanel p(20, 10);
  for (std::size_t j = 0; j < 20; ++j)
    for (auto& v : p.row(j)) v = n01(rng);
  const auto bs = batch_average(p, 3);
  const std::vector<std::vector<std::size_t>> lists{{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      double acc = 0.0;
      for (auto k : lists[i]) acc += p.at(j, k);
      EXPECT_NEAR(bs.series[i][j], acc / static_cast<double>(lists[i].size()), 1e-12);
    }
}

TEST(Batching, TimeMeanCommutesWithBatchMean) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  SnrPanel p(50, 17);
  for (std::size_t j = 0; j < 50; ++j)
    for (auto& v : p.row(j)) v = u(rng);
  const auto bs = batch_average(p, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    double a = 0.0;
    for (double v : bs.series[i]) a += v;
    a /= 50.0;
    double b = 0.0;
    for (std::size_t j = 0; j < 50; ++j)
      for (std::size_t k = bs.bounds[i].begin; k < bs.bounds[i].end; ++k) b += p.at(j, k);
    b /= 50.0 * static_cast<double>(bs.bounds[i].size());
    EXPECT_NEAR(a, b, 1e-10);
  }
}

TEST(Windows, ExhaustiveSmallCase) {
  const std::vector<double> s{1, 2, 3, 4};
  const auto w = make_windows(s, 2, 3);
  ASSERT_EQ(w.train_labels.size(), 1u);
  ASSERT_EQ(w.test_labels.size(), 1u);
  EXPECT_EQ(w.train_inputs(0, 0), 1.0);
  EXPECT_EQ(w.train_inputs(0, 1), 2.0);
  EXPECT_EQ(w.train_labels[0], 3.0);
  EXPECT_EQ(w.test_inputs(0, 0), 2.0);
  EXPECT_EQ(w.test_inputs(0, 1), 3.0);
  EXPECT_EQ(w.test_labels[0], 4.0);
  EXPECT_EQ(w.test_label_index[0], 3u);
}

TEST(Windows, LongestWindowGivesOnePair) {
  const std::vector<double> s{5, 6, 7, 8, 9};
  EXPECT_EQ(make_windows(s, 4, 5).size(), 1u);
  EXPECT_THROW(make_windows(s, 5, 5), std::invalid_argument);
}

TEST(Windows, CountingOracle) {
  std::vector<double> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i);
  const auto w = make_windows(s, 96, 800);
  EXPECT_EQ(w.size(), 904u);
  EXPECT_EQ(w.train_labels.size(), 800u - 96u);
  EXPECT_EQ(w.test_label_index.front(), 800u);
}

TEST(Windows, RoundTripReconstructsShiftedSeries) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<double> s(200);
  for (auto& v : s) v = n01(rng);
  const std::size_t w = 7;
  const auto ws = make_windows(s, w, 120);
  std::vector<double> labels = ws.train_labels;
  labels.insert(labels.end(), ws.test_labels.begin(), ws.test_labels.end());
  for (std::size_t j = 0; j < labels.size(); ++j) EXPECT_EQ(labels[j], s[j + w]);
  for (std::size_t r = 0; r < ws.train_labels.size(); ++r) EXPECT_EQ(ws.train_inputs(r, w - 1), s[r + w - 1]);
  for (std::size_t r = 0; r < ws.test_labels.size(); ++r)
    EXPECT_EQ(ws.test_inputs(r, w - 1), s[ws.test_label_index[r] - 1]);
}

TEST(NormalizedRmse, Oracles) {
  const std::vector<double> a{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(normalized_rmse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(normalized_rmse(a, std::vector<double>(4, 2.5)), 1.0);
  EXPECT_NEAR(normalized_rmse(a, std::vector<double>{1, 2, 3, 5}), 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_THROW(normalized_rmse(std::vector<double>(3, 1.0), std::vector<double>(3, 1.0)), DataError);
}

TEST(NormalizedRmse, AffineInvariant) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  std::vector<double> a(100), p(100);
  for (std::size_t i = 0; i < 100; ++i) {
    a[i] = n01(rng);
    p[i] = a[i] + 0.3 * n01(rng);
  }
  const double base = normalized_rmse(a, p);
  for (auto [scale, shift] : {std::pair{3.0, 10.0}, std::pair{0.01, -4.0}}) {
    std::vector<double> a2(a), p2(p);
    for (auto& v : a2) v = scale * v + shift;
    for (auto& v : p2) v = scale * v + shift;
    EXPECT_NEAR(normalized_rmse(a2, p2), base, 1e-10);
  }
}

TEST(PanelCsv, RoundTrip) {
  SnrPanel p(3, 4);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 4; ++k) p.row(j)[k] = 10.0 * static_cast<double>(j) + 0.125 * static_cast<double>(k);
  std::stringstream ss;
  write_panel_csv(ss, p);
  const SnrPanel q = read_panel_csv(ss);
  ASSERT_EQ(q.n_samples(), 3u);
  ASSERT_EQ(q.n_subcarriers(), 4u);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(q.at(j, k), p.at(j, k));
}

TEST(PanelCsv, StreamingBatchesMatchInMemory) {
  SnrPanel p(5, 10);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t k = 0; k < 10; ++k) p.row(j)[k] = static_cast<double>(j * 10 + k) * 0.5;
  std::stringstream ss;
  write_panel_csv(ss, p);
  const auto a = read_batch_series_csv(ss, 3);
  const auto b = batch_average(p, 3);
  EXPECT_EQ(a.series, b.series);
}

TEST(PanelCsv, MalformedInputRejected) {
  std::istringstream bad_header("time,snr_db_0\n0,1\n");
  EXPECT_THROW(read_panel_csv(bad_header), DataError);
  std::istringstream bad_cell("t_index,snr_db_0,snr_db_1\n0,1,abc\n");
  EXPECT_THROW(read_panel_csv(bad_cell), DataError);
  std::istringstream short_row("t_index,snr_db_0,snr_db_1\n0,1\n");
  EXPECT_THROW(read_panel_csv(short_row), DataError);
  std::istringstream gap("t_index,snr_db_0\n0,1\n2,1\n");
  EXPECT_THROW(read_panel_csv(gap), DataError);
}

TEST(LongCsv, ForwardFillsShortGapsAndSplitsLongOnes) {
  std::ostringstream os;
  os << "timestamp,subcarrier,snr_db\n";
  const auto row = [&](double t, double v) {
    os << t << ",0," << v << "\n" << t << ",1," << v + 1 << "\n";
  };
  row(0, 10);
  row(900, 11);
  // slots 2 and 3 missing (short gap)
  row(3600, 14);
  // slots 5..10 missing (long gap with max_fill 4)
  row(9900, 20);
  row(10800, 21);
  std::istringstream is(os.str());
  const auto segs = read_long_csv(is, 900.0, 4);
  ASSERT_EQ(segs.size(), 2u);
  ASSERT_EQ(segs[0].n_samples(), 5u);
  EXPECT_DOUBLE_EQ(segs[0].at(2, 0), 11.0);
  EXPECT_DOUBLE_EQ(segs[0].at(3, 1), 12.0);
  EXPECT_DOUBLE_EQ(segs[0].at(4, 0), 14.0);
  ASSERT_EQ(segs[1].n_samples(), 2u);
  EXPECT_DOUBLE_EQ(segs[1].at(1, 1), 22.0);
}

TEST(LongCsv, RejectsBadHeader) {
  std::istringstream is("t,sc,v\n0,0,1\n");
  EXPECT_THROW(read_long_csv(is), DataError);
}
