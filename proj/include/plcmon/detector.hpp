#pragma once

// Multivariate Gaussian model of stabilizer-batch prediction errors and the
// squared Mahalanobis distance test
//   D^2 = (delta - mu)^T Sigma^{-1} (delta - mu) > T_r(p_fa).
// Under the healthy Gaussian model D^2 ~ chi^2 with n_SB degrees of freedom.
// No degrees of freedom are removed for the estimated mu and Sigma.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcmon/errors.hpp"
#include "plcmon/numerics.hpp"
#include "plcmon/timeseries.hpp"

namespace plcmon {

struct ErrorStats {
  std::vector<double> mu;
  SymMatrix sigma;
  SymMatrix sigma_inv;  // (sigma + ridge I)^{-1}
  double ridge = 0.0;

  std::size_t dim() const { return mu.size(); }

  /// Stats with given moments; a negative ridge selects the default 1e-6 trace(sigma)/dim.
  static ErrorStats from_moments(std::vector<double> mu, SymMatrix sigma, double ridge = -1.0) {
    if (mu.size() != sigma.dim()) throw std::invalid_argument("error stats: mean/covariance dimension mismatch");
    if (ridge < 0.0) ridge = default_ridge(sigma);
    ErrorStats s;
    s.sigma_inv = sym_inverse(sigma, ridge);
    s.mu = std::move(mu);
    s.sigma = std::move(sigma);
    s.ridge = ridge;
    return s;
  }

  static double default_ridge(const SymMatrix& sigma) {
    return 1e-6 * sigma.trace() / static_cast<double>(sigma.dim());
  }

  nlohmann::json to_json() const {
    std::vector<std::vector<double>> sig(dim(), std::vector<double>(dim()));
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j) sig[i][j] = sigma(i, j);
    return {{"format", "plcmon-error-stats"}, {"version", 1}, {"mu", mu}, {"sigma", sig}, {"ridge", ridge}};
  }

  static ErrorStats from_json(const nlohmann::json& j) {
    try {
      if (j.value("format", "") != "plcmon-error-stats" || j.at("version").get<int>() != 1)
        throw DataError("error stats: unsupported format or version");
      auto mu = j.at("mu").get<std::vector<double>>();
      const auto sig = j.at("sigma").get<std::vector<std::vector<double>>>();
      if (mu.empty() || sig.size() != mu.size()) throw DataError("error stats: dimension mismatch");
      Matrix m(mu.size(), mu.size());
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (sig[i].size() != mu.size()) throw DataError("error stats: covariance is not square");
        for (std::size_t k = 0; k < mu.size(); ++k) m(i, k) = sig[i][k];
      }
      return from_moments(std::move(mu), SymMatrix(std::move(m)), j.at("ridge").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("error stats: malformed content: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("error stats: ") + e.what());
    }
  }
};

/// Sample mean and unbiased covariance of the rows of `errors`.
inline ErrorStats fit_error_stats(const Matrix& errors, double ridge = -1.0) {
  const std::size_t n = errors.rows();
  const std::size_t d = errors.cols();
  if (d == 0) throw std::invalid_argument("fit_error_stats: zero-dimensional errors");
  if (n < d + 1)
    throw DataError("fit_error_stats: need at least " + std::to_string(d + 1) + " error vectors, got " +
                    std::to_string(n));
  std::vector<double> mu(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) mu[i] += errors(r, i);
  for (auto& m : mu) m /= static_cast<double>(n);
  Matrix cov(d, d);
  std::vector<double> c(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) c[i] = errors(r, i) - mu[i];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = i; k < d; ++k) cov(i, k) += c[i] * c[k];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = i; k < d; ++k) {
      cov(i, k) /= static_cast<double>(n - 1);
      cov(k, i) = cov(i, k);
    }
  return ErrorStats::from_moments(std::move(mu), SymMatrix(std::move(cov)), ridge);
}

inline double smd(const ErrorStats& stats, std::span<const double> delta) {
  if (delta.size() != stats.dim()) throw std::invalid_argument("smd: dimension mismatch");
  std::vector<double> c(delta.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = delta[i] - stats.mu[i];
  return std::max(0.0, quadratic_form(stats.sigma_inv, c));
}

inline std::vector<double> smd_series(const ErrorStats& stats, const Matrix& errors) {
  std::vector<double> out(errors.rows());
  for (std::size_t r = 0; r < errors.rows(); ++r) out[r] = smd(stats, errors.row(r));
  return out;
}

inline void check_p_fa(double p_fa) {
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::domain_error("p_fa must lie in (0, 1)");
}

/// chi^2_kappa quantile at 1 - p_fa.
inline double threshold_theoretical(double p_fa, ChiSquaredDof kappa) {
  check_p_fa(p_fa);
  return chi2_quantile(kappa, 1.0 - p_fa);
}

/// k-th largest training SMD, k = floor(p_fa (n_tr - w)), 1-indexed.
inline double threshold_empirical(std::span<const double> train_smds, double p_fa, std::size_t n_tr, std::size_t w) {
  check_p_fa(p_fa);
  if (n_tr <= w) throw std::out_of_range("threshold_empirical: n_tr must exceed w");
  const auto k = static_cast<std::size_t>(std::floor(p_fa * static_cast<double>(n_tr - w)));
  if (k < 1 || k > train_smds.size())
    throw std::out_of_range("threshold_empirical: rank " + std::to_string(k) + " outside [1, " +
                            std::to_string(train_smds.size()) + "]");
  std::vector<double> d(train_smds.begin(), train_smds.end());
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end(), std::greater<>());
  return d[k - 1];
}

enum class ThresholdMode { theoretical, empirical };

inline const char* to_string(ThresholdMode m) { return m == ThresholdMode::empirical ? "empirical" : "theoretical"; }

inline ThresholdMode threshold_mode_from_string(const std::string& s) {
  if (s == "theoretical") return ThresholdMode::theoretical;
  if (s == "empirical") return ThresholdMode::empirical;
  throw ConfigError("unknown threshold mode '" + s + "'");
}

struct DetectionReport {
  std::vector<std::size_t> index;  // sample index of each SMD in the source series
  std::vector<double> smd;
  std::vector<bool> alarms;  // alarms[k] == (smd[k] > threshold)
  double threshold = 0.0;
  double p_fa_target = 0.01;
  ThresholdMode mode = ThresholdMode::theoretical;

  std::size_t alarm_count() const { return static_cast<std::size_t>(std::count(alarms.begin(), alarms.end(), true)); }

  /// Sample index of the first alarm at or after `from`.
  std::optional<std::size_t> first_alarm(std::size_t from = 0) const {
    for (std::size_t k = 0; k < alarms.size(); ++k)
      if (alarms[k] && index[k] >= from) return index[k];
    return std::nullopt;
  }

  void write_csv(std::ostream& os) const {
    std::string line = "index,smd,alarm\n";
    os << line;
    for (std::size_t k = 0; k < smd.size(); ++k) {
      line = std::to_string(index[k]);
      line += ',';
      detail::append_fixed(line, smd[k]);
      line += alarms[k] ? ",1\n" : ",0\n";
      os << line;
    }
  }

  nlohmann::json summary(std::optional<std::size_t> onset = std::nullopt) const {
    nlohmann::json j{{"threshold", threshold},
                     {"threshold_mode", to_string(mode)},
                     {"p_fa_target", p_fa_target},
                     {"test_samples", smd.size()},
                     {"alarm_count", alarm_count()},
                     {"alarm_fraction", smd.empty() ? 0.0 : static_cast<double>(alarm_count()) / smd.size()}};
    const auto first = first_alarm();
    j["first_alarm_index"] = first ? nlohmann::json(*first) : nlohmann::json(nullptr);
    if (onset) {
      const auto after = first_alarm(*onset);
      j["onset_index"] = *onset;
      j["first_alarm_at_or_after_onset"] = after ? nlohmann::json(*after) : nlohmann::json(nullptr);
    }
    return j;
  }
};

/// Alarms where the SMD of a test error vector exceeds `threshold`.
/// `first_index` is the series index of the first row of `test_errors`.
inline DetectionReport detect(const ErrorStats& stats, const Matrix& test_errors, double threshold, double p_fa,
                              ThresholdMode mode, std::size_t first_index = 0) {
  if (threshold < 0.0) throw std::invalid_argument("detect: threshold must be >= 0");
  check_p_fa(p_fa);
  DetectionReport r;
  r.threshold = threshold;
  r.p_fa_target = p_fa;
  r.mode = mode;
  r.smd = smd_series(stats, test_errors);
  r.alarms.resize(r.smd.size());
  r.index.resize(r.smd.size());
  for (std::size_t k = 0; k < r.smd.size(); ++k) {
    r.alarms[k] = r.smd[k] > threshold;
    r.index[k] = first_index + k;
  }
  return r;
}

}  // namespace plcmon
