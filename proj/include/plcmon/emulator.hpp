#pragma once

// Bottom-up PLC channel emulator for a T-topology network: two-conductor
// transmission-line segments chained as ABCD two-ports, a branch folded in
// as a shunt admittance at the tee, and fault elements (shunt resistance or
// locally scaled per-unit-length loss). Produces per-subcarrier SNR rows.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "plcmon/errors.hpp"
#include "plcmon/load_models.hpp"
#include "plcmon/numerics.hpp"
#include "plcmon/timeseries.hpp"

namespace plcmon {

using cplx = std::complex<double>;

/// Per-unit-length line parameters at one frequency.
struct PulParams {
  double r = 0.0;  // ohm/m
  double l = 0.0;  // H/m
  double g = 0.0;  // S/m
  double c = 0.0;  // F/m
};

/// Equivalent two-conductor cable: R(f) = r0 sqrt(f / f0) (skin effect),
/// G(f) = 2 pi f C tan(delta), constant L and C.
struct CableSpec {
  double r0_ohm_per_m = 0.01;
  double r_ref_hz = 1e6;
  double l_h_per_m = 0.4e-6;
  double c_f_per_m = 0.3e-9;
  double tan_delta = 4e-4;

  PulParams at(double freq_hz) const {
    return {r0_ohm_per_m * std::sqrt(freq_hz / r_ref_hz), l_h_per_m,
            2.0 * std::numbers::pi * freq_hz * c_f_per_m * tan_delta, c_f_per_m};
  }

  void validate() const {
    if (!(r0_ohm_per_m > 0 && r_ref_hz > 0 && l_h_per_m > 0 && c_f_per_m > 0 && tan_delta > 0))
      throw ConfigError("cable: all per-unit-length constants must be strictly positive");
  }
};

struct LineConstants {
  cplx gamma;  // propagation constant, 1/m
  cplx zc;     // characteristic impedance, ohm
};

/// Line constants with R and G multiplied by `loss_scale`.
inline LineConstants line_constants(const PulParams& p, double freq_hz, double loss_scale = 1.0) {
  const double w = 2.0 * std::numbers::pi * freq_hz;
  const cplx z(p.r * loss_scale, w * p.l);
  const cplx y(p.g * loss_scale, w * p.c);
  return {std::sqrt(z * y), std::sqrt(z / y)};
}

/// 2x2 two-port chain matrix [[a, b], [c, d]].
struct Abcd {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static Abcd identity() { return {}; }
  static Abcd shunt(cplx admittance) { return {1.0, 0.0, admittance, 1.0}; }
  static Abcd series(cplx impedance) { return {1.0, impedance, 0.0, 1.0}; }

  cplx det() const { return a * d - b * c; }

  friend Abcd operator*(const Abcd& x, const Abcd& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }

  /// Input impedance when terminated by `load`.
  cplx input_impedance(cplx load) const { return (a * load + b) / (c * load + d); }
};

inline Abcd abcd_line(const LineConstants& lc, double length_m) {
  if (length_m < 0.0) throw std::invalid_argument("abcd_segment: negative length");
  if (length_m == 0.0) return Abcd::identity();
  const cplx gl = lc.gamma * length_m;
  const cplx ch = std::cosh(gl);
  const cplx sh = std::sinh(gl);
  return {ch, lc.zc * sh, sh / lc.zc, ch};
}

/// Chain matrix of a uniform cable segment.
inline Abcd abcd_segment(const CableSpec& cable, double length_m, double freq_hz, double loss_scale = 1.0) {
  return abcd_line(line_constants(cable.at(freq_hz), freq_hz, loss_scale), length_m);
}

/// T-topology: tx --trunk_tx_to_tee-- tee --tee_to_rx-- rx, with a branch of
/// length `branch_m` at the tee terminated by the time-varying load.
struct TopologySpec {
  double trunk_tx_to_tee_m = 400.0;
  double tee_to_rx_m = 600.0;
  double branch_m = 10.0;
  cplx tx_impedance{50.0, 0.0};
  cplx rx_impedance{50.0, 0.0};

  double trunk_length() const { return trunk_tx_to_tee_m + tee_to_rx_m; }

  void validate() const {
    if (!(trunk_tx_to_tee_m > 0 && tee_to_rx_m > 0 && branch_m > 0))
      throw ConfigError("topology: all lengths must be > 0");
    if (!(tx_impedance.real() > 0 && rx_impedance.real() > 0))
      throw ConfigError("topology: tx/rx impedances must have positive real part");
  }
};

/// OFDM band and SNR synthesis settings.
struct BandSpec {
  std::size_t n_subcarriers = 917;
  double spacing_hz = 24414.0;
  double start_hz = 2e6;
  double tx_psd_dbm_per_hz = -55.0;
  double noise_psd_dbm_per_hz = -110.0;  // at start_hz
  double noise_slope_db_per_mhz = 0.0;
  double perturbation_variance_db2 = 1.0;

  double frequency(std::size_t k) const { return start_hz + spacing_hz * static_cast<double>(k); }
  double noise_psd(double freq_hz) const {
    return noise_psd_dbm_per_hz + noise_slope_db_per_mhz * (freq_hz - start_hz) * 1e-6;
  }

  void validate() const {
    if (n_subcarriers < 1) throw ConfigError("band: n_subcarriers must be >= 1");
    if (!(spacing_hz > 0)) throw ConfigError("band: spacing must be > 0");
    if (!(start_hz > 0)) throw ConfigError("band: start frequency must be > 0");
    if (perturbation_variance_db2 < 0) throw ConfigError("band: perturbation variance must be >= 0");
  }
};

enum class FaultKind { none, concentrated, distributed, termination_change, incipient };

inline const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::none: return "none";
    case FaultKind::concentrated: return "concentrated";
    case FaultKind::distributed: return "distributed";
    case FaultKind::termination_change: return "termination_change";
    case FaultKind::incipient: return "incipient";
  }
  return "?";
}

/// Declarative anomaly description. Locations are measured along the trunk from the transmitter.
struct FaultSpec {
  FaultKind kind = FaultKind::none;
  std::size_t onset_index = 0;
  double location_m = 100.0;
  double extent_m = 300.0;
  double fault_resistance_ohm = 100.0;
  double severity_fraction = 0.6;
  // Incipient: severity rises linearly from 0 at onset to peak_scale at ramp_end_index.
  std::size_t ramp_end_index = 0;
  double peak_scale = 2.0;
  // Termination change: blend to `switch_to` over this many samples.
  std::size_t switch_duration_samples = 4;
  LoadModel switch_to = LoadModel::l1;

  void validate(const TopologySpec& topo) const {
    if (kind == FaultKind::none || kind == FaultKind::termination_change) {
      if (kind == FaultKind::termination_change && switch_duration_samples == 0)
        throw ConfigError("fault: switch_duration_samples must be >= 1");
      return;
    }
    if (location_m < 0 || location_m > topo.trunk_length())
      throw ConfigError("fault: location outside cable span");
    if (kind == FaultKind::concentrated && !(fault_resistance_ohm > 0))
      throw ConfigError("fault: fault resistance must be > 0");
    if (kind == FaultKind::distributed || kind == FaultKind::incipient) {
      if (!(extent_m > 0) || location_m + extent_m > topo.trunk_length() + 1e-9)
        throw ConfigError("fault: affected section outside cable span");
      if (severity_fraction < 0 && kind == FaultKind::distributed)
        throw ConfigError("fault: severity must be >= 0");
    }
    if (kind == FaultKind::incipient) {
      if (ramp_end_index <= onset_index) throw ConfigError("fault: incipient ramp must end after onset");
      if (peak_scale < 0) throw ConfigError("fault: peak_scale must be >= 0");
    }
  }

  /// Incipient severity gamma(j): 0 before onset, linear to peak_scale at ramp_end, then held.
  double incipient_severity(std::size_t j) const {
    if (j <= onset_index) return 0.0;
    if (j >= ramp_end_index) return peak_scale;
    return peak_scale * static_cast<double>(j - onset_index) / static_cast<double>(ramp_end_index - onset_index);
  }
};

/// Network fault state at one sample.
struct FaultState {
  enum class Kind { none, shunt, lossy_section } kind = Kind::none;
  double location_m = 0.0;
  double extent_m = 0.0;
  double fault_resistance_ohm = std::numeric_limits<double>::infinity();
  double severity = 0.0;

  static FaultState healthy() { return {}; }
  static FaultState shunt(double location, double r_f) { return {Kind::shunt, location, 0.0, r_f, 0.0}; }
  static FaultState lossy(double location, double extent, double severity) {
    return {Kind::lossy_section, location, extent, std::numeric_limits<double>::infinity(), severity};
  }
};

/// Per-frequency precomputation of the static parts of the network for one
/// fault state; the branch load is applied per sample.
class ChannelModel {
 public:
  ChannelModel(const TopologySpec& topo, const CableSpec& cable, const BandSpec& band, const FaultState& fault)
      : topo_(topo) {
    topo.validate();
    cable.validate();
    band.validate();
    const double total = topo.trunk_length();
    if (fault.kind != FaultState::Kind::none) {
      if (fault.location_m < 0 || fault.location_m > total) throw ConfigError("fault located outside cable span");
      if (fault.kind == FaultState::Kind::lossy_section && fault.location_m + fault.extent_m > total + 1e-9)
        throw ConfigError("fault section extends beyond cable span");
    }

    const double tee = topo.trunk_tx_to_tee_m;
    std::vector<double> cuts{0.0, tee, total};
    if (fault.kind == FaultState::Kind::shunt) cuts.push_back(fault.location_m);
    if (fault.kind == FaultState::Kind::lossy_section) {
      cuts.push_back(fault.location_m);
      cuts.push_back(std::min(total, fault.location_m + fault.extent_m));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    up_.resize(band.n_subcarriers);
    down_.resize(band.n_subcarriers);
    branch_.resize(band.n_subcarriers);
    for (std::size_t k = 0; k < band.n_subcarriers; ++k) {
      const double f = band.frequency(k);
      const PulParams pul = cable.at(f);
      const LineConstants healthy = line_constants(pul, f);
      const LineConstants degraded =
          fault.kind == FaultState::Kind::lossy_section ? line_constants(pul, f, 1.0 + fault.severity) : healthy;
      Abcd up = Abcd::series(topo.tx_impedance);
      Abcd down;
      for (std::size_t s = 0; s < cuts.size(); ++s) {
        const double x = cuts[s];
        // Shunt elements at a node commute, so a fault exactly at the tee may sit on either side.
        if (fault.kind == FaultState::Kind::shunt && x == fault.location_m) {
          Abcd& at = x < tee ? up : down;
          at = at * Abcd::shunt(1.0 / fault.fault_resistance_ohm);
        }
        if (s + 1 == cuts.size()) break;
        const double next = cuts[s + 1];
        const bool in_section = fault.kind == FaultState::Kind::lossy_section && x >= fault.location_m &&
                                next <= fault.location_m + fault.extent_m + 1e-9;
        Abcd& chain = next <= tee ? up : down;
        chain = chain * abcd_line(in_section ? degraded : healthy, next - x);
      }
      up_[k] = up;
      down_[k] = down;
      branch_[k] = abcd_line(healthy, topo.branch_m);
    }
  }

  std::size_t n_subcarriers() const { return up_.size(); }

  /// Transfer function normalized so that |H|^2 is the transducer power gain
  /// from the tx source (impedance Z_tx) into the rx load:
  /// H = 2 sqrt(Re Z_tx Re Z_rx) I_rx / V_s.
  cplx transfer(std::size_t k, cplx branch_load) const {
    const cplx zb = branch_[k].input_impedance(branch_load);
    const Abcd total = up_[k] * Abcd::shunt(1.0 / zb) * down_[k];
    const cplx zr = topo_.rx_impedance;
    return 2.0 * std::sqrt(topo_.tx_impedance.real() * zr.real()) / (total.a * zr + total.b);
  }

  void cfr(cplx branch_load, std::span<cplx> out) const {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = transfer(k, branch_load);
  }

 private:
  TopologySpec topo_;
  std::vector<Abcd> up_;  // includes the tx source impedance
  std::vector<Abcd> down_;
  std::vector<Abcd> branch_;
};

/// Physical lower bound applied to load real parts before attaching them to the network.
inline constexpr double kMinLoadRealOhm = 0.1;

inline cplx passive_load(cplx z) { return {std::max(z.real(), kMinLoadRealOhm), z.imag()}; }

/// End-to-end channel frequency response for one branch load and fault state.
inline std::vector<cplx> cfr(const TopologySpec& topo, const CableSpec& cable, const BandSpec& band,
                             cplx branch_load, const FaultState& fault = FaultState::healthy()) {
  ChannelModel model(topo, cable, band, fault);
  std::vector<cplx> out(band.n_subcarriers);
  model.cfr(passive_load(branch_load), out);
  return out;
}

/// SNR_dB(f) = tx_psd + 20 log10 |H(f)| - noise_psd(f) - n(f), n ~ N(0, perturbation variance).
template <class Rng>
void snr_row(std::span<const cplx> h, const BandSpec& band, Rng& rng, std::span<double> out) {
  const double sd = std::sqrt(band.perturbation_variance_db2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double pert = sd > 0.0 ? sd * normal(rng) : 0.0;
    out[k] = band.tx_psd_dbm_per_hz + 20.0 * std::log10(std::abs(h[k])) - band.noise_psd(band.frequency(k)) - pert;
  }
}

/// Noise RNG for sample j; substreams are derived from (seed, j) so rows can be produced in any order.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t j) { return std::mt19937_64(mix_seed(seed, j)); }

inline SnrPanel snr_panel(std::span<const std::vector<cplx>> cfr_series, const BandSpec& band, std::uint64_t rng_seed) {
  if (cfr_series.empty()) throw std::invalid_argument("snr_panel: no samples");
  SnrPanel panel(cfr_series.size(), band.n_subcarriers);
  for (std::size_t j = 0; j < cfr_series.size(); ++j) {
    if (cfr_series[j].size() != band.n_subcarriers) throw std::invalid_argument("snr_panel: CFR width mismatch");
    auto rng = sample_rng(rng_seed, j);
    snr_row(cfr_series[j], band, rng, panel.row(j));
  }
  return panel;
}

/// Full synthetic-dataset configuration.
struct Scenario {
  TopologySpec topology;
  CableSpec cable;
  BandSpec band;
  LoadModel load_model = LoadModel::l3;
  CyclicProfile profile;
  ShockParams shocks;  // seed is ignored; derived from `seed`
  FaultSpec fault;
  std::size_t n_samples = 664 * kSamplesPerDay;
  std::uint64_t seed = 0;

  void validate() const {
    topology.validate();
    cable.validate();
    band.validate();
    profile.validate();
    shocks.validate();
    if (n_samples < 2) throw ConfigError("scenario: duration must cover at least 2 samples");
    fault.validate(topology);
    if (fault.kind != FaultKind::none && fault.onset_index >= n_samples)
      throw ConfigError("scenario: fault onset beyond end of dataset");
  }

  std::uint64_t load_seed() const { return mix_seed(seed, 1); }
  std::uint64_t noise_seed() const { return mix_seed(seed, 2); }

  /// Ground-truth anomaly flag for sample j.
  bool anomalous(std::size_t j) const { return fault.kind != FaultKind::none && j >= fault.onset_index; }
};

/// Branch termination sequence (with termination-change blending applied).
inline std::vector<cplx> scenario_loads(const Scenario& sc) {
  ShockParams shocks = sc.shocks;
  shocks.seed = sc.load_seed();
  auto loads = gen_load(sc.load_model, sc.n_samples, sc.profile, shocks);
  if (sc.fault.kind == FaultKind::termination_change) {
    const auto other = gen_load(sc.fault.switch_to, sc.n_samples, sc.profile, shocks);
    const auto dur = static_cast<double>(sc.fault.switch_duration_samples);
    for (std::size_t j = sc.fault.onset_index; j < sc.n_samples; ++j) {
      const double beta = std::min(1.0, static_cast<double>(j - sc.fault.onset_index + 1) / dur);
      loads[j] = (1.0 - beta) * loads[j] + beta * other[j];
    }
  }
  for (auto& z : loads) z = passive_load(z);
  return loads;
}

inline FaultState fault_state_at(const Scenario& sc, std::size_t j) {
  const FaultSpec& f = sc.fault;
  if (!sc.anomalous(j)) return FaultState::healthy();
  switch (f.kind) {
    case FaultKind::concentrated: return FaultState::shunt(f.location_m, f.fault_resistance_ohm);
    case FaultKind::distributed: return FaultState::lossy(f.location_m, f.extent_m, f.severity_fraction);
    case FaultKind::incipient: return FaultState::lossy(f.location_m, f.extent_m, f.incipient_severity(j));
    default: return FaultState::healthy();
  }
}

/// Streams SNR rows of a scenario in time order: fn(j, row).
inline void for_each_snr_row(const Scenario& sc, const std::function<void(std::size_t, std::span<const double>)>& fn) {
  sc.validate();
  const auto loads = scenario_loads(sc);
  const ChannelModel healthy(sc.topology, sc.cable, sc.band, FaultState::healthy());
  std::optional<ChannelModel> faulty;
  if (sc.fault.kind == FaultKind::concentrated || sc.fault.kind == FaultKind::distributed)
    faulty.emplace(sc.topology, sc.cable, sc.band, fault_state_at(sc, sc.fault.onset_index));

  std::vector<cplx> h(sc.band.n_subcarriers);
  std::vector<double> row(sc.band.n_subcarriers);
  const std::uint64_t noise_seed = sc.noise_seed();
  for (std::size_t j = 0; j < sc.n_samples; ++j) {
    const FaultState state = fault_state_at(sc, j);
    if (state.kind == FaultState::Kind::none) {
      healthy.cfr(loads[j], h);
    } else if (sc.fault.kind == FaultKind::incipient) {
      ChannelModel(sc.topology, sc.cable, sc.band, state).cfr(loads[j], h);
    } else {
      faulty->cfr(loads[j], h);
    }
    auto rng = sample_rng(noise_seed, j);
    snr_row(h, sc.band, rng, row);
    fn(j, row);
  }
}

struct Dataset {
  SnrPanel panel;
  std::vector<bool> anomaly_mask;
};

inline Dataset generate_dataset(const Scenario& sc) {
  Dataset ds{SnrPanel(sc.n_samples, sc.band.n_subcarriers), std::vector<bool>(sc.n_samples)};
  for_each_snr_row(sc, [&](std::size_t j, std::span<const double> row) {
    std::copy(row.begin(), row.end(), ds.panel.row(j).begin());
    ds.anomaly_mask[j] = sc.anomalous(j);
  });
  return ds;
}

/// Stabilizer-batch averages of a scenario without materializing the full panel.
inline BatchSeries generate_batch_series(const Scenario& sc, std::size_t n_batches) {
  auto out = BatchSeries::empty(batch_bounds(sc.band.n_subcarriers, n_batches));
  for (auto& s : out.series) s.reserve(sc.n_samples);
  for_each_snr_row(sc, [&](std::size_t, std::span<const double> row) { out.append(batch_average_row(row, out.bounds)); });
  return out;
}

}  // namespace plcmon
