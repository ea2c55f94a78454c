#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "plcmon/forecasting.hpp"

using namespace plcmon;

namespace {

std::vector<double> ar_series(std::size_t n, std::vector<double> phi, std::uint64_t seed, double c = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> x(n + 200, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double v = c + n01(rng);
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (t > i) v += phi[i] * x[t - 1 - i];
    x[t] = v;
  }
  return {x.begin() + 200, x.end()};
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> x(n);
  for (auto& v : x) v = n01(rng);
  return x;
}

NetTrainConfig quick_net() {
  NetTrainConfig c;
  c.optimizer = Optimizer::adam;
  c.learning_rate = 0.01;
  c.batch_size = 32;
  c.epochs = 20;
  c.patience = 5;
  c.seed = 3;
  return c;
}

template <class Net>
double gradient_error(std::size_t window, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const Net net(window);
  std::vector<double> p(net.size());
  for (auto& v : p) v = 0.5 * n01(rng);
  Matrix x(4, window);
  std::vector<double> y(4);
  for (auto& v : x.data()) v = n01(rng);
  for (auto& v : y) v = n01(rng);
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  std::vector<double> g(p.size());
  net.loss_and_grad(p, x, y, rows, g);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto q = p;
    q[i] += 1e-5;
    const double up = net.loss_and_grad(q, x, y, rows, {});
    q[i] -= 2e-5;
    const double dn = net.loss_and_grad(q, x, y, rows, {});
    const double fd = (up - dn) / 2e-5;
    diff += (fd - g[i]) * (fd - g[i]);
    norm += std::max(fd * fd, g[i] * g[i]);
  }
  return std::sqrt(diff / norm);
}

}  // namespace

TEST(Baseline, ReturnsLastValue) {
  BaselinePredictor b(3);
  EXPECT_DOUBLE_EQ(b.predict_one(std::vector<double>{40.0, 12.0, 41.5}), 41.5);
  BaselinePredictor one(1);
  const std::vector<double> s{1, 2, 3, 4};
  EXPECT_EQ(predict_series(one, s, 1), (std::vector<double>{1, 2, 3}));
}

TEST(Avg, StoresTrainingMean) {
  AvgPredictor a(2);
  EXPECT_THROW(a.predict_one(std::vector<double>{1, 2}), std::logic_error);
  a.fit(std::vector<double>{1, 2, 3});
  EXPECT_DOUBLE_EQ(a.mean(), 2.0);
  EXPECT_DOUBLE_EQ(a.predict_one(std::vector<double>{9, 9}), 2.0);
}

TEST(PredictSeries, OutputLengthAndWindowCheck) {
  BaselinePredictor b(5);
  const auto s = white_noise(40, 1);
  EXPECT_EQ(predict_series(b, s, 5).size(), 35u);
  EXPECT_EQ(predict_series(b, s, 17).size(), 23u);
  EXPECT_THROW(predict_series(b, s, 4), std::invalid_argument);
  EXPECT_THROW(b.predict_one(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Arima, DifferenceOperator) {
  const std::vector<double> x{1, 4, 9, 16, 25};
  EXPECT_EQ(difference(x, 1), (std::vector<double>{3, 5, 7, 9}));
  EXPECT_EQ(difference(x, 2), (std::vector<double>{2, 2, 2}));
  EXPECT_EQ(difference(x, 0), x);
}

TEST(Arima, DirectRecursionAr1) {
  ArimaParams p{{1, 0, 0}, {0.5}, {}, 0.0, 1.0};
  ArimaPredictor m(p, 4);
  EXPECT_DOUBLE_EQ(m.predict_one(std::vector<double>{3, 1, -2, 10}), 5.0);
}

TEST(Arima, RecoversAr1Coefficient) {
  const auto x = ar_series(10000, {0.7}, 123);
  ArimaPredictor m(ArimaOrder{1, 0, 0}, 10);
  m.fit(x);
  EXPECT_NEAR(m.params().phi[0], 0.7, 0.03);
  EXPECT_NEAR(m.params().noise_variance, 1.0, 0.05);
}

TEST(Arima, RecoversArma11) {
  // x_t = 0.5 x_{t-1} + a_t - 0.4 a_{t-1}
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<double> x(20000);
  double prev_a = 0.0, prev_x = 0.0;
  for (auto& v : x) {
    const double a = n01(rng);
    v = 0.5 * prev_x + a - 0.4 * prev_a;
    prev_x = v;
    prev_a = a;
  }
  ArimaPredictor m(ArimaOrder{1, 0, 1}, 10);
  m.fit(x);
  EXPECT_NEAR(m.params().phi[0], 0.5, 0.05);
  EXPECT_NEAR(m.params().theta[0], 0.4, 0.05);
}

TEST(Arima, IntegratedForecastEqualsDifferencedForecastPlusLast) {
  std::vector<double> s = ar_series(3000, {0.6}, 4, 0.1);
  for (std::size_t i = 1; i < s.size(); ++i) s[i] += s[i - 1];  // integrate once
  ArimaPredictor d1(ArimaOrder{1, 1, 1}, 30);
  d1.fit(s);
  ArimaParams flat = d1.params();
  flat.order.d = 0;
  const ArimaPredictor d0(flat, 29);
  for (std::size_t n = 100; n < 130; ++n) {
    const std::span<const double> win(s.data() + n - 30, 30);
    const auto u = difference(win, 1);
    EXPECT_NEAR(d1.predict_one(win), d0.predict_one(u) + win.back(), 1e-9);
  }
}

TEST(Arima, Ima11OnRampFollowsSlope) {
  // theta = 0: forecasts are previous value plus the intercept of the differenced series.
  std::vector<double> ramp(50);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 2.0 + 0.5 * static_cast<double>(i);
  const ArimaPredictor m(ArimaParams{{0, 1, 1}, {}, {0.0}, 0.5, 1.0}, 10);
  const auto pred = predict_series(m, ramp, 10);
  for (std::size_t k = 0; k < pred.size(); ++k) EXPECT_NEAR(pred[k], ramp[10 + k - 1] + 0.5, 1e-12);
}

TEST(Arima, RandomWalkEqualsBaseline) {
  const auto s = ar_series(500, {0.3}, 8);
  const ArimaPredictor rw(ArimaParams{{0, 1, 0}, {}, {}, 0.0, 1.0}, 12);
  const BaselinePredictor b(12);
  EXPECT_EQ(predict_series(rw, s, 12), predict_series(b, s, 12));
}

TEST(Arima, DeterministicFit) {
  const auto s = ar_series(2000, {0.5, 0.2}, 6);
  ArimaPredictor a(ArimaOrder{2, 1, 1}, 96), b(ArimaOrder{2, 1, 1}, 96);
  a.fit(s);
  b.fit(s);
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Arima, InvalidOrdersAndData) {
  EXPECT_THROW(ArimaPredictor(ArimaOrder{0, 0, 0}, 10), std::invalid_argument);
  EXPECT_THROW(ArimaPredictor(ArimaOrder{3, 0, 0}, 10), std::invalid_argument);
  ArimaPredictor m(ArimaOrder{2, 1, 1}, 96);
  EXPECT_THROW(m.fit(white_noise(50, 1)), DataError);
}

TEST(ArimaGrid, TwentyFourCandidates) {
  const auto c = arima_candidate_orders();
  EXPECT_EQ(c.size(), 24u);
  for (const auto& o : c) EXPECT_FALSE(o.p == 0 && o.q == 0);
}

TEST(ArimaGrid, WhiteNoiseIsUnpredictable) {
  std::vector<double> best;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = white_noise(1200, 100 + s);
    const auto r = arima_grid_search(x, 0.2, 20);
    double m = INFINITY;
    for (const auto& sc : r.scores)
      if (sc.validation_nrmse && sc.order == r.best.order) m = *sc.validation_nrmse;
    best.push_back(m);
  }
  std::nth_element(best.begin(), best.begin() + 10, best.end());
  EXPECT_GE(best[10], 0.95);
}

TEST(ArimaGrid, RampSelectsDifferencedModel) {
  std::vector<double> ramp(400);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> tiny(0.0, 1e-6);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.25 * static_cast<double>(i) + tiny(rng);
  const auto r = arima_grid_search(ramp, 0.2, 20);
  EXPECT_GE(r.best.order.d, 1);
  double e = INFINITY;
  for (const auto& sc : r.scores)
    if (sc.order == r.best.order) e = *sc.validation_nrmse;
  EXPECT_LT(e, 1e-3);
}

TEST(ArimaGrid, RecoversAr2Structure) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = ar_series(2000, {0.6, 0.3}, 500 + s, 1.0);
    const auto r = arima_grid_search(x, 0.2, 20);
    hits += (r.best.order.p == 2 && r.best.order.d == 0) ? 1 : 0;
  }
  EXPECT_GE(hits, 16);
}

TEST(L2Boost, SingleStumpMatchesExhaustiveSearch) {
  // Perfectly separable by feature 1 at threshold 0.5.
  Matrix x(6, 2);
  std::vector<double> y(6);
  const double f0[] = {3, 1, 2, 5, 4, 0};
  const double f1[] = {0, 0, 0, 1, 1, 1};
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = f0[i];
    x(i, 1) = f1[i];
    y[i] = f1[i] > 0.5 ? 4.0 : -2.0;
  }
  L2BoostPredictor m({1, 1.0}, 2);
  m.fit_windows(x, y);
  ASSERT_EQ(m.stages().size(), 1u);
  EXPECT_EQ(m.stages()[0].feature, 1u);
  EXPECT_DOUBLE_EQ(m.stages()[0].threshold, 0.5);
  EXPECT_DOUBLE_EQ(m.base(), 1.0);
  // Explained variance of the hand-fit stump equals the full variance.
  EXPECT_DOUBLE_EQ(m.training_mse()[0], 9.0);
  EXPECT_NEAR(m.training_mse()[1], 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.predict_one(std::vector<double>{0.0, 1.0}), 4.0);
}

TEST(L2Boost, StumpSearchAgreesWithBruteForce) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Matrix x(30, 3);
  std::vector<double> y(30);
  for (auto& v : x.data()) v = std::round(n01(rng) * 4.0) / 4.0;
  for (std::size_t i = 0; i < 30; ++i) y[i] = x(i, 2) * 2.0 + 0.3 * n01(rng);
  std::vector<std::vector<std::size_t>> order(3);
  for (std::size_t f = 0; f < 3; ++f) {
    order[f].resize(30);
    std::iota(order[f].begin(), order[f].end(), std::size_t{0});
    std::stable_sort(order[f].begin(), order[f].end(), [&](auto a, auto b) { return x(a, f) < x(b, f); });
  }
  const auto s = fit_stump(x, y, order);
  ASSERT_TRUE(s);
  double best = INFINITY;
  for (std::size_t f = 0; f < 3; ++f)
    for (std::size_t r = 0; r < 30; ++r) {
      const double t = x(r, f);
      double sl = 0, sr = 0;
      int nl = 0, nr = 0;
      for (std::size_t i = 0; i < 30; ++i) (x(i, f) <= t ? (sl += y[i], ++nl) : (sr += y[i], ++nr));
      if (nl == 0 || nr == 0) continue;
      double sse = 0;
      for (std::size_t i = 0; i < 30; ++i) sse += std::pow(y[i] - (x(i, f) <= t ? sl / nl : sr / nr), 2);
      best = std::min(best, sse);
    }
  double got = 0;
  for (std::size_t i = 0; i < 30; ++i) got += std::pow(y[i] - (*s)(x.row(i)), 2);
  EXPECT_NEAR(got, best, 1e-9);
}

TEST(L2Boost, TrainingMseNonIncreasing) {
  const auto s = ar_series(600, {0.8}, 12);
  L2BoostPredictor m({60, 0.3}, 8);
  m.fit(s);
  const auto& mse = m.training_mse();
  ASSERT_GT(mse.size(), 2u);
  for (std::size_t k = 1; k < mse.size(); ++k) EXPECT_LE(mse[k], mse[k - 1] + 1e-12);
}

TEST(Neural, ZeroWeightFfnnOutputsDenormalizedBias) {
  FfnnPredictor f(4);
  FfnnNet net(4);
  std::vector<double> p(net.size(), 0.0);
  f.set_state(p, {10.0, 2.0});
  EXPECT_DOUBLE_EQ(f.predict_one(std::vector<double>{1, 2, 3, 4}), 10.0);
  p.back() = 0.5;  // output bias in the normalized domain
  f.set_state(p, {10.0, 2.0});
  EXPECT_DOUBLE_EQ(f.predict_one(std::vector<double>{1, 2, 3, 4}), 11.0);
}

TEST(Neural, GradientsMatchFiniteDifferences) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    EXPECT_LT(gradient_error<FfnnNet>(5, s), 1e-5);
    EXPECT_LT(gradient_error<LstmNet>(5, 100 + s), 1e-5);
  }
}

TEST(Neural, FitIsDeterministicAndLearns) {
  const auto s = ar_series(800, {0.9}, 33);
  FfnnPredictor a(8, quick_net()), b(8, quick_net());
  a.fit(s);
  b.fit(s);
  EXPECT_EQ(a.params(), b.params());
  const auto pred = predict_series(a, s, 8);
  const std::span<const double> actual(s.data() + 8, s.size() - 8);
  EXPECT_LT(normalized_rmse(actual, pred), 0.7);
}

TEST(Neural, MomentumOptimizerTrains) {
  const auto s = ar_series(400, {0.9}, 34);
  NetTrainConfig c;
  c.epochs = 200;
  c.seed = 1;
  LstmPredictor m(6, c);
  m.fit(s);
  ASSERT_FALSE(m.history().train_loss.empty());
  EXPECT_LT(m.history().train_loss.back(), m.history().train_loss.front());
}

TEST(ModelIo, RoundTripPreservesPredictions) {
  const auto s = ar_series(1500, {0.7, 0.1}, 77);
  std::vector<std::unique_ptr<Predictor>> models;
  for (auto kind : {PredictorKind::baseline, PredictorKind::avg, PredictorKind::arima, PredictorKind::l2boost,
                    PredictorKind::ffnn, PredictorKind::lstm}) {
    PredictorConfig cfg;
    cfg.kind = kind;
    cfg.window = 12;
    cfg.boost.k_total = 20;
    cfg.net = quick_net();
    cfg.net.epochs = 5;
    models.push_back(fit_predictor(cfg, s));
  }
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  const auto dir = std::filesystem::temp_directory_path() / "plcmon_model_io";
  std::filesystem::create_directories(dir);
  for (const auto& m : models) {
    const auto path = (dir / (std::string(to_string(m->kind())) + ".json")).string();
    save_model(*m, path);
    const auto back = load_model(path);
    EXPECT_EQ(back->kind(), m->kind());
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> w(12);
      for (auto& v : w) v = n01(rng);
      worst = std::max(worst, std::abs(back->predict_one(w) - m->predict_one(w)));
    }
    EXPECT_EQ(worst, 0.0) << to_string(m->kind());
  }
}

TEST(ModelIo, CorruptedFileRejected) {
  ArimaPredictor m(ArimaOrder{1, 0, 0}, 5);
  m.fit(ar_series(500, {0.5}, 2));
  auto env = model_envelope(m);
  env["model"]["phi"][0] = 0.9;  // checksum no longer matches
  EXPECT_THROW(model_from_envelope(env), DataError);
  EXPECT_THROW(model_from_envelope(json{{"format", "other"}}), DataError);

  const auto path = (std::filesystem::temp_directory_path() / "plcmon_corrupt.json").string();
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_model(path), DataError);
  EXPECT_THROW(load_model(path + ".missing"), DataError);
}

TEST(ModelIo, UnknownKindRejected) {
  EXPECT_THROW(predictor_kind_from_string("svm"), ConfigError);
  EXPECT_EQ(predictor_kind_from_string("lstm"), PredictorKind::lstm);
}
