#pragma once

// Special functions and small dense linear algebra: chi-squared CDF/quantile,
// Cholesky-based inversion of symmetric matrices, least squares and
// multivariate Gaussian sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plcmon/errors.hpp"

namespace plcmon {

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: dimension mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square symmetric matrix. Symmetry is checked on construction (1e-10 relative)
/// and the stored entries are exactly symmetrized.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw std::invalid_argument("SymMatrix: must be square with dimension >= 1");
    const double scale = std::max(m_.max_abs(), std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = i + 1; j < dim(); ++j) {
        if (std::abs(m_(i, j) - m_(j, i)) > 1e-10 * scale)
          throw std::invalid_argument("SymMatrix: input is not symmetric");
        const double avg = 0.5 * (m_(i, j) + m_(j, i));
        m_(i, j) = avg;
        m_(j, i) = avg;
      }
  }

  static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

  static SymMatrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return SymMatrix(std::move(m));
  }

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i);
    return t;
  }

 private:
  Matrix m_;
};

/// Degrees of freedom of a chi-squared distribution.
class ChiSquaredDof {
 public:
  explicit ChiSquaredDof(int kappa) : kappa_(kappa) {
    if (kappa < 1) throw std::invalid_argument("chi-squared degrees of freedom must be >= 1");
  }
  int value() const { return kappa_; }

 private:
  int kappa_;
};

namespace detail {

// Series expansion of P(a, x), valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma function P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw std::domain_error("regularized_gamma_p: a must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

inline double chi2_cdf(ChiSquaredDof kappa, double x) {
  return regularized_gamma_p(0.5 * kappa.value(), 0.5 * x);
}

/// Inverse of the chi-squared CDF, found by bisection on the regularized
/// incomplete gamma function. Absolute error well below 1e-8.
inline double chi2_quantile(ChiSquaredDof kappa, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("chi2_quantile: prob must lie in (0, 1)");
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(kappa.value()));
  while (chi2_cdf(kappa, hi) < prob) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(kappa, mid) < prob)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Throws NumericalError when a pivot is not strictly positive.
inline Matrix cholesky(const SymMatrix& a) {
  const std::size_t n = a.dim();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw NumericalError("Cholesky factorization failed: matrix is not positive definite (pivot " +
                           std::to_string(j) + ")");
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Cholesky factor of a positive semi-definite matrix. Pivots below
/// `tol * max diagonal` become zero columns; clearly negative pivots throw.
inline Matrix cholesky_semidefinite(const SymMatrix& a, double tol = 1e-12) {
  const std::size_t n = a.dim();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double cutoff = tol * std::max(scale, std::numeric_limits<double>::min());
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (diag < -cutoff * 1e3 || !std::isfinite(diag))
      throw NumericalError("Cholesky factorization failed: covariance is indefinite");
    if (diag <= cutoff) continue;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// (m + ridge I)^-1 via Cholesky.
inline SymMatrix sym_inverse(const SymMatrix& m, double ridge = 0.0) {
  if (ridge < 0.0) throw std::invalid_argument("sym_inverse: ridge must be nonnegative");
  const std::size_t n = m.dim();
  Matrix shifted = m.matrix();
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) += ridge;
  const Matrix l = cholesky(SymMatrix(std::move(shifted)));

  // Invert L column by column, then form L^-T L^-1.
  Matrix linv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    linv(c, c) = 1.0 / l(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = c; k < i; ++k) s -= l(i, k) * linv(k, c);
      linv(i, c) = s / l(i, i);
    }
  }
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return SymMatrix(std::move(inv));
}

/// x^T A x for symmetric A.
inline double quadratic_form(const SymMatrix& a, std::span<const double> x) {
  if (x.size() != a.dim()) throw std::invalid_argument("quadratic_form: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) row += a(i, j) * x[j];
    acc += x[i] * row;
  }
  return acc;
}

/// Minimum-norm-residual solution of A x = b by Householder QR.
/// A must have at least as many rows as columns and full column rank.
inline std::vector<double> least_squares(Matrix a, std::vector<double> b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) throw std::invalid_argument("least_squares: rhs length mismatch");
  if (m < n) throw std::invalid_argument("least_squares: underdetermined system");

  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) throw NumericalError("least_squares: rank-deficient design matrix");
    const double alpha = a(k, k) > 0.0 ? -norm : norm;
    std::vector<double> v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * a(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= f * v[i - k];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < m; ++i) dot += v[i - k] * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < m; ++i) b[i] -= f * v[i - k];
  }

  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    if (std::abs(a(k, k)) < 1e-14 * std::max(1.0, a.max_abs()))
      throw NumericalError("least_squares: rank-deficient design matrix");
    x[k] = s / a(k, k);
  }
  return x;
}

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

/// Derivative-free Nelder-Mead simplex minimization. `step` gives the initial
/// simplex offset per coordinate. Stops when the spread of simplex values
/// falls below `ftol` (relative) or after `max_iter` iterations.
template <class F>
MinimizeResult minimize_nelder_mead(F&& f, std::vector<double> x0, std::span<const double> step, double ftol = 1e-10,
                                    int max_iter = 4000) {
  const std::size_t n = x0.size();
  if (step.size() != n) throw std::invalid_argument("minimize_nelder_mead: step size mismatch");
  if (n == 0) return {x0, f(x0), 0};
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(n + 1);
  int it = 0;
  for (; it < max_iter; ++it) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (std::abs(vals[best]) + 1e-300)) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return p;
    };
    auto reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < vals[best]) {
      auto expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[worst] = std::move(expanded);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(reflected);
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = std::move(reflected);
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      auto contracted = along(outside ? -0.5 : 0.5);
      const double fc = f(contracted);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = std::move(contracted);
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], it};
}

/// Draws from N(mean, cov). The covariance may be singular (semi-definite).
class GaussianSampler {
 public:
  GaussianSampler(std::vector<double> mean, const SymMatrix& cov)
      : mean_(std::move(mean)), factor_(cholesky_semidefinite(cov)) {
    if (mean_.size() != cov.dim()) throw std::invalid_argument("GaussianSampler: dimension mismatch");
  }

  std::size_t dim() const { return mean_.size(); }

  template <class Rng>
  std::vector<double> draw(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(dim());
    for (double& v : z) v = normal(rng);
    std::vector<double> out = mean_;
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t k = 0; k <= i; ++k) out[i] += factor_(i, k) * z[k];
    return out;
  }

 private:
  std::vector<double> mean_;
  Matrix factor_;
};

/// One draw from N(mean, cov), deterministic in `rng_seed`.
inline std::vector<double> gaussian_vector(std::vector<double> mean, const SymMatrix& cov,
                                           std::uint64_t rng_seed) {
  GaussianSampler sampler(std::move(mean), cov);
  std::mt19937_64 rng(rng_seed);
  return sampler.draw(rng);
}

/// SplitMix64 finalizer; used to derive independent RNG substreams from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace plcmon
