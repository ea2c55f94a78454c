#pragma once

// ARIMA(p, d, q) with 0 <= p, d, q <= 2, estimated by conditional sum of
// squares. The d-times differenced series u follows
//   u_n = c + sum_i phi_i u_{n-i} + a_n - sum_i theta_i a_{n-i},
// with shocks before the conditioning start set to zero.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "plcmon/forecasting/predictor.hpp"
#include "plcmon/numerics.hpp"
#include "plcmon/timeseries.hpp"

namespace plcmon {

struct ArimaOrder {
  int p = 2;
  int d = 1;
  int q = 1;

  void validate() const {
    if (p < 0 || p > 2 || d < 0 || d > 2 || q < 0 || q > 2)
      throw std::invalid_argument("ARIMA order components must lie in [0, 2]");
    // A pure integrated model (0, d, 0) is allowed for d >= 1 (random walk); (0, 0, 0) is not.
    if (p == 0 && q == 0 && d == 0) throw std::invalid_argument("ARIMA(0,0,0) has no dynamics");
  }
  int total() const { return p + d + q; }
  bool operator==(const ArimaOrder&) const = default;
};

struct ArimaParams {
  ArimaOrder order;
  std::vector<double> phi;
  std::vector<double> theta;
  double intercept = 0.0;
  double noise_variance = 1.0;
};

/// d-th order difference: u_{1,j} = x_j - x_{j-1}, u_{k,j} = u_{k-1,j} - u_{k-1,j-1}.
inline std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> u(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    if (u.size() < 2) return {};
    for (std::size_t j = 0; j + 1 < u.size(); ++j) u[j] = u[j + 1] - u[j];
    u.pop_back();
  }
  return u;
}

namespace detail {

// Stationarity (AR) / invertibility (MA) region of 1 - c1 z - c2 z^2.
inline bool inside_unit_region(std::span<const double> c) {
  constexpr double margin = 1e-6;
  if (c.empty()) return true;
  if (c.size() == 1) return std::abs(c[0]) < 1.0 - margin;
  return c[1] + c[0] < 1.0 - margin && c[1] - c[0] < 1.0 - margin && std::abs(c[1]) < 1.0 - margin;
}

}  // namespace detail

/// Conditional residuals a_t for t >= p (earlier shocks zero). Returns the
/// forecast of the next value of u, and accumulates the residual sum of squares.
inline double arma_css_pass(std::span<const double> u, std::span<const double> phi, std::span<const double> theta,
                            double intercept, double* sse = nullptr, std::size_t* count = nullptr) {
  const std::size_t p = phi.size();
  const std::size_t q = theta.size();
  std::vector<double> a(u.size(), 0.0);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t t = p; t < u.size(); ++t) {
    double pred = intercept;
    for (std::size_t i = 1; i <= p; ++i) pred += phi[i - 1] * u[t - i];
    for (std::size_t i = 1; i <= q && i <= t; ++i) pred -= theta[i - 1] * a[t - i];
    a[t] = u[t] - pred;
    s += a[t] * a[t];
    ++n;
  }
  if (sse) *sse = s;
  if (count) *count = n;
  const std::size_t m = u.size();
  double next = intercept;
  for (std::size_t i = 1; i <= p; ++i) next += phi[i - 1] * (m >= i ? u[m - i] : 0.0);
  for (std::size_t i = 1; i <= q; ++i) next -= theta[i - 1] * (m >= i && m - i >= p ? a[m - i] : 0.0);
  return next;
}

/// One-step forecast of x from its recent values under fitted parameters.
/// The ARMA forecast of the d-th difference is integrated back level by level.
inline double arima_forecast(const ArimaParams& params, std::span<const double> recent) {
  const int d = params.order.d;
  std::vector<std::vector<double>> levels{std::vector<double>(recent.begin(), recent.end())};
  for (int k = 0; k < d; ++k) levels.push_back(difference(levels.back(), 1));
  double next = arma_css_pass(levels.back(), params.phi, params.theta, params.intercept);
  for (int k = d - 1; k >= 0; --k) next += levels[static_cast<std::size_t>(k)].back();
  return next;
}

class ArimaPredictor final : public Predictor {
 public:
  explicit ArimaPredictor(ArimaOrder order = {}, std::size_t window = 96) : window_(window) {
    order.validate();
    params_.order = order;
    if (window_ < static_cast<std::size_t>(order.d + std::max(order.p, order.q) + 1))
      throw std::invalid_argument("arima: window too short for the model order");
  }

  /// Model with given (not estimated) parameters.
  ArimaPredictor(ArimaParams params, std::size_t window) : ArimaPredictor(params.order, window) {
    if (params.phi.size() != static_cast<std::size_t>(params.order.p) ||
        params.theta.size() != static_cast<std::size_t>(params.order.q))
      throw std::invalid_argument("arima: coefficient count does not match order");
    params_ = std::move(params);
    fitted_ = true;
  }

  PredictorKind kind() const override { return PredictorKind::arima; }
  std::size_t window() const override { return window_; }
  bool fitted() const override { return fitted_; }
  const ArimaParams& params() const { return params_; }

  void fit(std::span<const double> train) override {
    const ArimaOrder o = params_.order;
    if (train.size() <= std::max<std::size_t>(window_, static_cast<std::size_t>(o.total() + 1)) ||
        train.size() < static_cast<std::size_t>(o.d + 2 * (o.p + o.q) + 8))
      throw DataError("arima: insufficient training data");
    const auto u = difference(train, o.d);
    params_ = estimate_css(u, o);
    fitted_ = true;
  }

  json to_json() const override {
    return {{"window", window_},
            {"order", {params_.order.p, params_.order.d, params_.order.q}},
            {"phi", params_.phi},
            {"theta", params_.theta},
            {"intercept", params_.intercept},
            {"noise_variance", params_.noise_variance}};
  }
  static ArimaPredictor from_json(const json& j) {
    const auto o = j.at("order").get<std::vector<int>>();
    if (o.size() != 3) throw DataError("arima: order must have three entries");
    ArimaParams p{{o[0], o[1], o[2]},
                  j.at("phi").get<std::vector<double>>(),
                  j.at("theta").get<std::vector<double>>(),
                  j.at("intercept").get<double>(),
                  j.at("noise_variance").get<double>()};
    return ArimaPredictor(std::move(p), j.at("window").get<std::size_t>());
  }
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<ArimaPredictor>(*this); }

  /// CSS estimate of ARMA(p, q) + intercept on an already differenced series.
  static ArimaParams estimate_css(std::span<const double> u, ArimaOrder order) {
    const auto p = static_cast<std::size_t>(order.p);
    const auto q = static_cast<std::size_t>(order.q);
    const std::size_t dim = 1 + p + q;
    std::vector<double> x0 = initial_guess(u, p, q);

    auto unpack = [&](std::span<const double> x, std::vector<double>& phi, std::vector<double>& theta) {
      phi.assign(x.begin() + 1, x.begin() + 1 + static_cast<std::ptrdiff_t>(p));
      theta.assign(x.begin() + 1 + static_cast<std::ptrdiff_t>(p), x.end());
    };
    std::vector<double> phi;
    std::vector<double> theta;
    auto objective = [&](const std::vector<double>& x) {
      unpack(x, phi, theta);
      if (!detail::inside_unit_region(phi) || !detail::inside_unit_region(theta))
        return std::numeric_limits<double>::max();
      double sse = 0.0;
      arma_css_pass(u, phi, theta, x[0], &sse);
      return std::isfinite(sse) ? sse : std::numeric_limits<double>::max();
    };

    std::vector<double> best = x0;
    if (q > 0) {
      double scale = 0.0;
      for (double v : u) scale += v * v;
      scale = std::sqrt(scale / static_cast<double>(u.size()));
      std::vector<double> step(dim, 0.1);
      step[0] = 0.1 * std::max(scale, 1e-6);
      // Two restarts from the converged point guard against premature simplex collapse.
      for (int round = 0; round < 3; ++round) {
        auto res = minimize_nelder_mead(objective, best, step, 1e-12, 4000);
        best = res.x;
        for (auto& s : step) s *= 0.3;
      }
    }
    ArimaParams out;
    out.order = order;
    out.intercept = best[0];
    unpack(best, out.phi, out.theta);
    double sse = 0.0;
    std::size_t n = 0;
    arma_css_pass(u, out.phi, out.theta, out.intercept, &sse, &n);
    if (!std::isfinite(sse)) throw NumericalError("arima: non-finite residual sum of squares");
    out.noise_variance = n > 0 ? sse / static_cast<double>(n) : 0.0;
    return out;
  }

 protected:
  double predict_impl(std::span<const double> recent) const override { return arima_forecast(params_, recent); }

 private:
  // OLS for pure AR (the exact CSS optimum); Hannan-Rissanen regression when q > 0.
  static std::vector<double> initial_guess(std::span<const double> u, std::size_t p, std::size_t q) {
    const std::size_t n = u.size();
    std::vector<double> resid(n, 0.0);
    std::size_t start = p;
    if (q > 0) {
      const std::size_t m = std::min<std::size_t>(std::max<std::size_t>(p + q + 2, 10), n / 4);
      resid = ar_residuals(u, m);
      start = std::max(p, m + q);
    }
    const std::size_t dim = 1 + p + q;
    if (n < start + dim + 2) throw DataError("arima: insufficient data for initial estimate");
    Matrix design(n - start, dim);
    std::vector<double> rhs(n - start);
    for (std::size_t t = start; t < n; ++t) {
      auto row = design.row(t - start);
      row[0] = 1.0;
      for (std::size_t i = 1; i <= p; ++i) row[i] = u[t - i];
      // Regression on +a_{t-i}; the model uses -theta_i a_{t-i}.
      for (std::size_t i = 1; i <= q; ++i) row[p + i] = -resid[t - i];
      rhs[t - start] = u[t];
    }
    std::vector<double> x;
    try {
      x = least_squares(std::move(design), std::move(rhs));
    } catch (const NumericalError&) {
      x.assign(dim, 0.0);
      x[0] = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
    }
    // Project into the admissible region by shrinking toward zero.
    auto shrink = [&](std::size_t off, std::size_t len) {
      std::span<double> c(x.data() + off, len);
      while (!detail::inside_unit_region(c))
        for (auto& v : c) v *= 0.9;
    };
    shrink(1, p);
    shrink(1 + p, q);
    return x;
  }

  static std::vector<double> ar_residuals(std::span<const double> u, std::size_t m) {
    const std::size_t n = u.size();
    std::vector<double> resid(n, 0.0);
    if (n < 2 * m + 4) return resid;
    Matrix design(n - m, m + 1);
    std::vector<double> rhs(n - m);
    for (std::size_t t = m; t < n; ++t) {
      auto row = design.row(t - m);
      row[0] = 1.0;
      for (std::size_t i = 1; i <= m; ++i) row[i] = u[t - i];
      rhs[t - m] = u[t];
    }
    std::vector<double> coef;
    try {
      coef = least_squares(design, rhs);
    } catch (const NumericalError&) {
      return resid;
    }
    for (std::size_t t = m; t < n; ++t) {
      double pred = coef[0];
      for (std::size_t i = 1; i <= m; ++i) pred += coef[i] * u[t - i];
      resid[t] = u[t] - pred;
    }
    return resid;
  }

  std::size_t window_;
  ArimaParams params_;
  bool fitted_ = false;
};

/// All (p, d, q) in [0, 2]^3 except p = q = 0: 24 candidates.
inline std::vector<ArimaOrder> arima_candidate_orders() {
  std::vector<ArimaOrder> out;
  for (int p = 0; p <= 2; ++p)
    for (int d = 0; d <= 2; ++d)
      for (int q = 0; q <= 2; ++q)
        if (p != 0 || q != 0) out.push_back({p, d, q});
  return out;
}

struct ArimaCandidateScore {
  ArimaOrder order;
  std::optional<double> validation_nrmse;  // empty when the fit failed
};

struct ArimaSearchResult {
  ArimaParams best;  // refit on the whole training series
  std::vector<ArimaCandidateScore> scores;
};

/// Fits every candidate on the head of `train`, scores one-step normalized
/// RMSE on the held-out tail (validation_fraction of the samples) and refits
/// the winner on all of `train`. Ties go to the smaller p + d + q.
inline ArimaSearchResult arima_grid_search(std::span<const double> train, double validation_fraction = 0.2,
                                           std::size_t window = 96) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("arima_grid_search: validation_fraction must lie in (0, 1)");
  const auto split = static_cast<std::size_t>(std::floor((1.0 - validation_fraction) * static_cast<double>(train.size())));
  if (split <= window + 16 || split >= train.size()) throw DataError("arima_grid_search: not enough data");
  const auto head = train.first(split);
  const std::vector<double> tail(train.begin() + static_cast<std::ptrdiff_t>(split), train.end());

  ArimaSearchResult result;
  std::optional<std::pair<double, ArimaOrder>> best;
  for (const auto& order : arima_candidate_orders()) {
    ArimaCandidateScore score{order, std::nullopt};
    try {
      ArimaPredictor model(order, window);
      model.fit(head);
      const auto pred = predict_series(model, train, split);
      const double e = normalized_rmse(tail, pred);
      if (std::isfinite(e)) {
        score.validation_nrmse = e;
        if (!best || e < best->first || (e == best->first && order.total() < best->second.total()))
          best = std::make_pair(e, order);
      }
    } catch (const std::exception&) {
      // Failed candidates are skipped.
    }
    result.scores.push_back(score);
  }
  if (!best) throw NumericalError("arima_grid_search: every candidate failed");
  ArimaPredictor winner(best->second, window);
  winner.fit(train);
  result.best = winner.params();
  return result;
}

}  // namespace plcmon
