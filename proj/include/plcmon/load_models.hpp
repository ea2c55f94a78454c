#pragma once

// Time-series termination-impedance models used to drive the channel
// emulator: second-order auto-regressive (L1), daily cyclic (L2) and their
// average (L3). All generators are pure functions of their parameters.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace plcmon {

using Impedance = std::complex<double>;

/// Samples per day at the fixed 15-minute sampling period.
inline constexpr std::size_t kSamplesPerDay = 96;
inline constexpr double kSamplePeriodSeconds = 900.0;

/// Random-shock distribution U[real_low, real_high] + j U[imag_low, imag_high].
/// Degenerate bounds (low == high) yield a constant shock; all-zero bounds disable shocks.
struct ShockParams {
  double real_low = 0.0;
  double real_high = 50.0;
  double imag_low = -50.0;
  double imag_high = 50.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (real_low > real_high || imag_low > imag_high)
      throw std::invalid_argument("ShockParams: low bound exceeds high bound");
  }

  static ShockParams constant(Impedance value, std::uint64_t seed = 0) {
    return {value.real(), value.real(), value.imag(), value.imag(), seed};
  }
  static ShockParams disabled() { return constant({0.0, 0.0}); }
};

class ShockStream {
 public:
  explicit ShockStream(const ShockParams& p)
      : p_(p), rng_(p.seed), re_(p.real_low, p.real_high), im_(p.imag_low, p.imag_high) {
    p.validate();
  }

  Impedance next() {
    // Both components always consume a draw so the stream layout is independent of degeneracy.
    const double re = re_(rng_);
    const double im = im_(rng_);
    return {p_.real_low == p_.real_high ? p_.real_low : re, p_.imag_low == p_.imag_high ? p_.imag_low : im};
  }

 private:
  ShockParams p_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> re_;
  std::uniform_real_distribution<double> im_;
};

struct Harmonic {
  int order = 1;
  double sine_amp = 0.0;
  double cosine_amp = 0.0;
};

/// Real-valued periodic profile L'_2 plus a constant impedance offset.
struct CyclicProfile {
  std::size_t fundamental_period = kSamplesPerDay;
  std::vector<Harmonic> harmonics{{1, 30.0, 20.0}, {2, 10.0, 8.0}, {3, 5.0, 4.0}};
  Impedance offset{50.0, 0.0};

  void validate() const {
    if (fundamental_period < 2) throw std::invalid_argument("CyclicProfile: fundamental_period must be >= 2");
    if (harmonics.empty()) throw std::invalid_argument("CyclicProfile: at least one harmonic required");
    for (const auto& h : harmonics)
      if (h.order < 1) throw std::invalid_argument("CyclicProfile: harmonic order must be positive");
  }

  /// Sum of the harmonics at sample index j (offset excluded).
  double evaluate(std::size_t j) const {
    double v = 0.0;
    for (const auto& h : harmonics) {
      // Reduce the phase index modulo the period so j and j + period give bit-identical values.
      const std::size_t k = (static_cast<std::size_t>(h.order) * j) % fundamental_period;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(fundamental_period);
      v += h.sine_amp * std::sin(phase) + h.cosine_amp * std::cos(phase);
    }
    return v;
  }
};

/// L1: L_1 = r_1; L_2 = 0.8 L_1 + r_2; L_j = 0.6 L_{j-1} + 0.3 L_{j-2} + 0.1 r_j.
inline std::vector<Impedance> gen_l1(std::size_t n, const ShockParams& shocks) {
  if (n == 0) throw std::invalid_argument("gen_l1: n must be >= 1");
  ShockStream r(shocks);
  std::vector<Impedance> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Impedance shock = r.next();
    if (j == 0)
      out.push_back(shock);
    else if (j == 1)
      out.push_back(0.8 * out[0] + shock);
    else
      out.push_back(0.6 * out[j - 1] + 0.3 * out[j - 2] + 0.1 * shock);
  }
  return out;
}

/// L2: offset + 0.9 L'_2 + 0.1 r, with L'_2 the harmonic sum at phase 2 pi order j / period.
inline std::vector<Impedance> gen_l2(std::size_t n, const CyclicProfile& profile, const ShockParams& shocks) {
  if (n == 0) throw std::invalid_argument("gen_l2: n must be >= 1");
  profile.validate();
  ShockStream r(shocks);
  std::vector<Impedance> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) out.push_back(profile.offset + 0.9 * profile.evaluate(j) + 0.1 * r.next());
  return out;
}

/// L3: elementwise mean of L1 and L2.
inline std::vector<Impedance> gen_l3(std::span<const Impedance> l1, std::span<const Impedance> l2) {
  if (l1.size() != l2.size()) throw std::invalid_argument("gen_l3: length mismatch");
  std::vector<Impedance> out(l1.size());
  for (std::size_t j = 0; j < l1.size(); ++j) out[j] = 0.5 * (l1[j] + l2[j]);
  return out;
}

enum class LoadModel { l1, l2, l3 };

inline const char* to_string(LoadModel m) {
  switch (m) {
    case LoadModel::l1: return "L1";
    case LoadModel::l2: return "L2";
    case LoadModel::l3: return "L3";
  }
  return "?";
}

/// Generates one of the three models. L1 and L2 shocks use independent
/// substreams of `seed`, so L3 is exactly the mean of the L1 and L2 outputs
/// produced from the same seed.
inline std::vector<Impedance> gen_load(LoadModel model, std::size_t n, const CyclicProfile& profile,
                                       ShockParams shocks) {
  const std::uint64_t base = shocks.seed;
  ShockParams s1 = shocks;
  ShockParams s2 = shocks;
  s1.seed = base * 2 + 1;
  s2.seed = base * 2 + 2;
  switch (model) {
    case LoadModel::l1: return gen_l1(n, s1);
    case LoadModel::l2: return gen_l2(n, profile, s2);
    case LoadModel::l3: {
      const auto a = gen_l1(n, s1);
      const auto b = gen_l2(n, profile, s2);
      return gen_l3(a, b);
    }
  }
  throw std::invalid_argument("gen_load: unknown model");
}

/// CSV export: index,real_ohms,imag_ohms.
inline void write_load_csv(std::ostream& os, std::span<const Impedance> loads) {
  os << "index,real_ohms,imag_ohms\n";
  char buf[64];
  for (std::size_t j = 0; j < loads.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", loads[j].real(), loads[j].imag());
    os << j << ',' << buf << '\n';
  }
}

}  // namespace plcmon
