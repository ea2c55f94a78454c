#pragma once

// SNR panel container, stabilizer-batch averaging, supervised windowing,
// normalized RMSE and CSV ingestion.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plcmon/errors.hpp"
#include "plcmon/numerics.hpp"

namespace plcmon {

/// Time-indexed matrix of per-subcarrier SNR values in dB (row = sample).
class SnrPanel {
 public:
  SnrPanel() = default;
  SnrPanel(std::size_t n_samples, std::size_t n_subcarriers, double period_s = 900.0)
      : n_samples_(n_samples), n_subcarriers_(n_subcarriers), period_s_(period_s),
        values_(n_samples * n_subcarriers, 0.0) {}

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_subcarriers() const { return n_subcarriers_; }
  double period_s() const { return period_s_; }

  double& at(std::size_t j, std::size_t k) { return values_[j * n_subcarriers_ + k]; }
  double at(std::size_t j, std::size_t k) const { return values_[j * n_subcarriers_ + k]; }

  std::span<double> row(std::size_t j) { return {values_.data() + j * n_subcarriers_, n_subcarriers_}; }
  std::span<const double> row(std::size_t j) const { return {values_.data() + j * n_subcarriers_, n_subcarriers_}; }

  void append_row(std::span<const double> r) {
    if (n_subcarriers_ == 0 && n_samples_ == 0) n_subcarriers_ = r.size();
    if (r.size() != n_subcarriers_) throw DataError("SnrPanel: row width mismatch");
    values_.insert(values_.end(), r.begin(), r.end());
    ++n_samples_;
  }

  void validate() const {
    if (n_samples_ == 0 || n_subcarriers_ == 0) throw DataError("SnrPanel: empty panel");
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i]))
        throw DataError("SnrPanel: non-finite value at sample " + std::to_string(i / n_subcarriers_));
  }

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_subcarriers_ = 0;
  double period_s_ = 900.0;
  std::vector<double> values_;
};

/// Half-open subcarrier index range [begin, end).
struct BatchRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const BatchRange&) const = default;
};

/// Contiguous partition of n_subcarriers into n_batches ranges; the remainder
/// n_subcarriers % n_batches goes one-each to the leading batches.
inline std::vector<BatchRange> batch_bounds(std::size_t n_subcarriers, std::size_t n_batches) {
  if (n_batches == 0) throw std::invalid_argument("batch_bounds: n_batches must be >= 1");
  if (n_batches > n_subcarriers) throw std::invalid_argument("batch_bounds: more batches than subcarriers");
  const std::size_t base = n_subcarriers / n_batches;
  const std::size_t extra = n_subcarriers % n_batches;
  std::vector<BatchRange> out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n_batches; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out.push_back({pos, pos + len});
    pos += len;
  }
  return out;
}

inline std::vector<double> batch_average_row(std::span<const double> row, std::span<const BatchRange> bounds) {
  std::vector<double> out(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = bounds[i].begin; k < bounds[i].end; ++k) s += row[k];
    out[i] = s / static_cast<double>(bounds[i].size());
  }
  return out;
}

/// Per-batch mean-SNR series z_i (one sequence per stabilizer batch).
struct BatchSeries {
  std::vector<BatchRange> bounds;
  std::vector<std::vector<double>> series;

  std::size_t n_batches() const { return series.size(); }
  std::size_t n_samples() const { return series.empty() ? 0 : series.front().size(); }

  void append(std::span<const double> batch_values) {
    if (batch_values.size() != series.size()) throw DataError("BatchSeries: batch count mismatch");
    for (std::size_t i = 0; i < series.size(); ++i) series[i].push_back(batch_values[i]);
  }

  /// Vector of all batch values at sample j.
  std::vector<double> at(std::size_t j) const {
    std::vector<double> v(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) v[i] = series[i][j];
    return v;
  }

  static BatchSeries empty(std::vector<BatchRange> bounds) {
    BatchSeries b;
    b.series.resize(bounds.size());
    b.bounds = std::move(bounds);
    return b;
  }
};

inline BatchSeries batch_average(const SnrPanel& panel, std::size_t n_batches) {
  auto out = BatchSeries::empty(batch_bounds(panel.n_subcarriers(), n_batches));
  for (auto& s : out.series) s.reserve(panel.n_samples());
  for (std::size_t j = 0; j < panel.n_samples(); ++j) out.append(batch_average_row(panel.row(j), out.bounds));
  return out;
}

/// Supervised windows over one series. Row r of an input matrix is
/// series[j, j + w) and its label is series[j + w]; a pair is a training pair
/// iff its 0-based label index is < n_tr.
struct WindowedSet {
  std::size_t w = 0;
  std::size_t n_tr = 0;
  Matrix train_inputs;
  std::vector<double> train_labels;
  Matrix test_inputs;
  std::vector<double> test_labels;
  std::vector<std::size_t> test_label_index;

  std::size_t size() const { return train_labels.size() + test_labels.size(); }
};

inline WindowedSet make_windows(std::span<const double> series, std::size_t w, std::size_t n_tr) {
  if (w == 0) throw std::invalid_argument("make_windows: window must be >= 1");
  if (w >= series.size()) throw std::invalid_argument("make_windows: window must be shorter than the series");
  WindowedSet set;
  set.w = w;
  set.n_tr = n_tr;
  const std::size_t total = series.size() - w;
  const std::size_t n_train = n_tr > w ? std::min(total, n_tr - w) : 0;
  set.train_inputs = Matrix(n_train, w);
  set.test_inputs = Matrix(total - n_train, w);
  for (std::size_t j = 0; j < total; ++j) {
    const std::size_t label = j + w;
    const bool train = label < n_tr;
    auto row = train ? set.train_inputs.row(j) : set.test_inputs.row(j - n_train);
    std::copy(series.begin() + static_cast<std::ptrdiff_t>(j), series.begin() + static_cast<std::ptrdiff_t>(label),
              row.begin());
    if (train) {
      set.train_labels.push_back(series[label]);
    } else {
      set.test_labels.push_back(series[label]);
      set.test_label_index.push_back(label);
    }
  }
  return set;
}

/// sqrt(sum (x - x~)^2) / sqrt(sum (x - mean(x))^2).
inline double normalized_rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty() || actual.size() != predicted.size())
    throw std::invalid_argument("normalized_rmse: lengths must be equal and nonzero");
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    num += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    den += (actual[i] - mean) * (actual[i] - mean);
  }
  if (den == 0.0) throw DataError("normalized_rmse: actual series is constant (zero denominator)");
  return std::sqrt(num) / std::sqrt(den);
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    out.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline void append_fixed(std::string& out, double v, int precision = 6) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  out.append(buf, res.ptr);
}

}  // namespace detail

inline std::string panel_csv_header(std::size_t n_subcarriers) {
  std::string h = "t_index";
  for (std::size_t k = 0; k < n_subcarriers; ++k) h += ",snr_db_" + std::to_string(k);
  return h;
}

/// Appends one wide-format data row (t_index followed by SNR values, 6 decimals).
inline void append_panel_csv_row(std::string& out, std::size_t t_index, std::span<const double> row) {
  out += std::to_string(t_index);
  for (double v : row) {
    out += ',';
    detail::append_fixed(out, v);
  }
  out += '\n';
}

inline void write_panel_csv(std::ostream& os, const SnrPanel& panel) {
  os << panel_csv_header(panel.n_subcarriers()) << '\n';
  std::string buf;
  for (std::size_t j = 0; j < panel.n_samples(); ++j) {
    buf.clear();
    append_panel_csv_row(buf, j, panel.row(j));
    os << buf;
  }
}

/// Streams the wide schema `t_index,snr_db_0,...` row by row: fn(t_index, row).
/// Rows must be consecutive from 0. Returns the subcarrier count.
template <class Fn>
std::size_t for_each_panel_csv_row(std::istream& is, Fn&& fn) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("panel CSV: empty input");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "t_index") throw DataError("panel CSV: header must start with t_index");
  for (std::size_t k = 1; k < header.size(); ++k)
    if (header[k] != "snr_db_" + std::to_string(k - 1))
      throw DataError("panel CSV: unexpected header column '" + std::string(header[k]) + "'");
  const std::size_t n_sc = header.size() - 1;
  std::vector<double> row(n_sc);
  std::size_t line_no = 1;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != n_sc + 1)
      throw DataError("panel CSV line " + std::to_string(line_no) + ": expected " + std::to_string(n_sc + 1) +
                      " columns, got " + std::to_string(cells.size()));
    const double t = detail::parse_double(cells[0], line_no);
    if (t != static_cast<double>(expected))
      throw DataError("panel CSV line " + std::to_string(line_no) + ": t_index out of sequence");
    for (std::size_t k = 0; k < n_sc; ++k) {
      row[k] = detail::parse_double(cells[k + 1], line_no);
      if (!std::isfinite(row[k])) throw DataError("panel CSV line " + std::to_string(line_no) + ": non-finite SNR");
    }
    fn(expected, std::span<const double>(row));
    ++expected;
  }
  if (expected == 0) throw DataError("panel CSV: no data rows");
  return n_sc;
}

inline SnrPanel read_panel_csv(std::istream& is) {
  SnrPanel panel;
  for_each_panel_csv_row(is, [&](std::size_t, std::span<const double> row) { panel.append_row(row); });
  panel.validate();
  return panel;
}

/// Batch averages of a wide CSV without keeping the full panel in memory.
inline BatchSeries read_batch_series_csv(std::istream& is, std::size_t n_batches) {
  BatchSeries out;
  for_each_panel_csv_row(is, [&](std::size_t j, std::span<const double> row) {
    if (j == 0) out = BatchSeries::empty(batch_bounds(row.size(), n_batches));
    out.append(batch_average_row(row, out.bounds));
  });
  return out;
}

inline BatchSeries read_batch_series_csv(const std::string& path, std::size_t n_batches) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  return read_batch_series_csv(f, n_batches);
}

inline SnrPanel read_panel_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  return read_panel_csv(f);
}

/// Batch series as CSV: t_index,batch_0,...
inline void write_batch_series_csv(std::ostream& os, const BatchSeries& bs) {
  std::string line = "t_index";
  for (std::size_t i = 0; i < bs.n_batches(); ++i) line += ",batch_" + std::to_string(i);
  os << line << '\n';
  for (std::size_t j = 0; j < bs.n_samples(); ++j) {
    line = std::to_string(j);
    for (const auto& s : bs.series) {
      line += ',';
      detail::append_fixed(line, s[j]);
    }
    os << line << '\n';
  }
}

/// Long-format field recordings: rows of (timestamp_s, subcarrier, snr_db).
/// Samples are aligned to a grid of `period_s` starting at the first
/// timestamp. Up to `max_fill` consecutive missing grid points are
/// forward-filled; a longer gap ends the current segment and starts a new one.
/// Subcarriers missing at an otherwise-present timestamp are forward-filled too.
inline std::vector<SnrPanel> read_long_csv(std::istream& is, double period_s = 900.0, std::size_t max_fill = 4) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("long CSV: empty input");
  const auto header = detail::split_csv_line(line);
  if (header.size() != 3 || header[0] != "timestamp" || header[1] != "subcarrier" || header[2] != "snr_db")
    throw DataError("long CSV: header must be timestamp,subcarrier,snr_db");

  std::map<long long, std::map<std::size_t, double>> by_slot;
  std::size_t n_sc = 0;
  bool have_t0 = false;
  double t0 = 0.0;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 3) throw DataError("long CSV line " + std::to_string(line_no) + ": expected 3 columns");
    const double t = detail::parse_double(cells[0], line_no);
    const double sc = detail::parse_double(cells[1], line_no);
    const double snr = detail::parse_double(cells[2], line_no);
    if (sc < 0 || sc != std::floor(sc)) throw DataError("long CSV line " + std::to_string(line_no) + ": bad subcarrier");
    if (!std::isfinite(snr)) throw DataError("long CSV line " + std::to_string(line_no) + ": non-finite SNR");
    if (!have_t0 || t < t0) {
      // Re-anchor if an earlier timestamp appears; slots are rebuilt below.
      if (have_t0 && t < t0) {
        std::map<long long, std::map<std::size_t, double>> shifted;
        const long long delta = std::llround((t0 - t) / period_s);
        for (auto& [slot, vals] : by_slot) shifted[slot + delta] = std::move(vals);
        by_slot = std::move(shifted);
      }
      t0 = t;
      have_t0 = true;
    }
    const long long slot = std::llround((t - t0) / period_s);
    by_slot[slot][static_cast<std::size_t>(sc)] = snr;
    n_sc = std::max(n_sc, static_cast<std::size_t>(sc) + 1);
  }
  if (by_slot.empty()) throw DataError("long CSV: no data rows");

  std::vector<SnrPanel> segments;
  SnrPanel current(0, n_sc, period_s);
  std::vector<double> last(n_sc, std::nan(""));
  long long prev_slot = 0;
  bool first = true;
  for (const auto& [slot, vals] : by_slot) {
    std::vector<double> row = last;
    for (const auto& [k, v] : vals) row[k] = v;
    if (!first) {
      const long long gap = slot - prev_slot - 1;
      if (gap > static_cast<long long>(max_fill)) {
        if (current.n_samples() > 0) segments.push_back(std::move(current));
        current = SnrPanel(0, n_sc, period_s);
        row.assign(n_sc, std::nan(""));
        for (const auto& [k, v] : vals) row[k] = v;
      } else if (current.n_samples() > 0) {
        for (long long g = 0; g < gap; ++g) current.append_row(last);
      }
    }
    first = false;
    prev_slot = slot;
    if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) {
      // Cannot start a segment until every subcarrier has been observed once.
      last = row;
      continue;
    }
    current.append_row(row);
    last = row;
  }
  if (current.n_samples() > 0) segments.push_back(std::move(current));
  if (segments.empty()) throw DataError("long CSV: no complete sample rows");
  return segments;
}

}  // namespace plcmon
