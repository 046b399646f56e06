#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <optional>
#include <string>
#include <vector>

#include "gyro_afe/chain.hpp"
#include "gyro_afe/errors.hpp"
#include "gyro_afe/preamp.hpp"

namespace gyro_afe {

/// End-to-end noise budget of one chain at the carrier frequency.
struct Budget {
  NoiseBreakdown input;      // C/sqrt(Hz)
  NoiseBreakdown breakdown;  // V/sqrt(Hz) at the preamp output
  double bandwidth = 0.0;    // Hz
  double rms_noise = 0.0;    // V
  double signal_rms = 0.0;   // V, full-scale Coriolis carrier at the preamp output
  double snr = 0.0;
  bool snr_unbounded = false;
  double rate_resolution = 0.0;  // (rad/s)/sqrt(Hz)
};

inline Budget noise_budget(const ChainConfig& cfg, double bandwidth, double temp_c = 25.0,
                           double t_abs = kDefaultTabs) {
  const ResonatorParams& res = cfg.resonator;
  const double f = res.carrier_hz();
  Budget b;
  b.input = input_noise_psd(cfg.topology, res, cfg.amp, f, t_abs);
  b.breakdown = output_noise_psd(cfg.topology, res, cfg.amp, f, t_abs, temp_c);
  b.bandwidth = bandwidth;
  b.rms_noise = b.breakdown.total_rss * std::sqrt(bandwidth);

  const double g = std::abs(charge_gain(cfg.topology, res, temp_c));
  const double diff_amplitude = 2.0 * res.rate_sensitivity * res.full_scale_rate;
  b.signal_rms = g * diff_amplitude / std::numbers::sqrt2;

  constexpr double inf = std::numeric_limits<double>::infinity();
  if (b.rms_noise > 0.0) {
    b.snr = b.signal_rms / b.rms_noise;
  } else {
    b.snr = inf;
    b.snr_unbounded = true;
  }
  const double sf = std::abs(scale_factor(cfg, temp_c));
  b.rate_resolution = sf > 0.0 ? b.breakdown.total_rss / sf : inf;
  return b;
}

/// Temperature series of gain and rate output.
struct SweepSeries {
  std::vector<double> temperatures;  // °C
  std::vector<double> gains;         // V/C
  std::vector<double> outputs;       // V
  std::vector<double> drift_ppm;     // gain relative to its t_ref value
  double total_drift_v = 0.0;        // outputs.back() - outputs.front()
  double total_drift_ppm = 0.0;      // gain, last point vs first point
  double drift_slope = 0.0;          // ppm/°C, endpoint based
  double lsq_slope = 0.0;            // ppm/°C, least-squares fit of drift_ppm
  // Drift of the + / - feedback capacitor ratio; set for the differential
  // charge amplifier only.
  std::optional<double> pair_ratio_drift_ppm;
};

inline std::vector<double> temperature_grid(double t_min, double t_max, double step) {
  if (!(t_min < t_max) || !(step > 0.0))
    throw std::invalid_argument("temperature grid needs t_min < t_max and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = t_min + static_cast<double>(i) * step;
  return ts;
}

inline SweepSeries thermal_sweep(const ChainConfig& cfg, double t_min, double t_max, double step,
                                 double rate) {
  SweepSeries s;
  s.temperatures = temperature_grid(t_min, t_max, step);
  const std::size_t n = s.temperatures.size();
  s.gains.resize(n);
  s.outputs.resize(n);
  s.drift_ppm.resize(n);

  const double g_ref = charge_gain(cfg.topology, cfg.resonator, cfg.resonator.t_ref);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = s.temperatures[i];
    s.gains[i] = charge_gain(cfg.topology, cfg.resonator, t);
    s.outputs[i] = rate_output(cfg, rate, t).dc_value;
    s.drift_ppm[i] = 1e6 * (s.gains[i] / g_ref - 1.0);
  }

  const double span = s.temperatures.back() - s.temperatures.front();
  s.total_drift_v = s.outputs.back() - s.outputs.front();
  s.total_drift_ppm = 1e6 * (s.gains.back() / s.gains.front() - 1.0);
  s.drift_slope = s.total_drift_ppm / span;

  double mt = 0.0, md = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += s.temperatures[i];
    md += s.drift_ppm[i];
  }
  mt /= static_cast<double>(n);
  md /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = s.temperatures[i] - mt;
    sxy += dt * (s.drift_ppm[i] - md);
    sxx += dt * dt;
  }
  s.lsq_slope = sxx > 0.0 ? sxy / sxx : 0.0;

  if (const auto* d = std::get_if<DiffChargeAmp>(&cfg.topology)) {
    const double r0 = matched_ratio_at(d->c_fb_pair, 0, 1, s.temperatures.front());
    const double r1 = matched_ratio_at(d->c_fb_pair, 0, 1, s.temperatures.back());
    s.pair_ratio_drift_ppm = 1e6 * (r1 / r0 - 1.0);
  }
  return s;
}

struct ComparisonRow {
  std::string topology;
  double noise_density = 0.0;  // V/sqrt(Hz) at the carrier
  double drift_ppm = 0.0;      // magnitude over the comparison range
  bool integrable = false;
  bool simplicity = false;
};

struct CompareOptions {
  double t_abs = kDefaultTabs;
  double t_min = -40.0;
  double t_max = 80.0;
  double gain_tolerance = 1e-9;  // relative
};

/// Ranks gain-normalized topologies by output noise, then by thermal drift.
///
/// The drift column is the endpoint gain drift, except for the differential
/// charge amplifier whose stability is set by the ratio of its matched
/// feedback pair; that row reports the pair-ratio drift.
inline std::vector<ComparisonRow> compare_topologies(const ResonatorParams& res,
                                                     const OpAmpModel& amp,
                                                     const std::vector<Topology>& topologies,
                                                     const CompareOptions& opt = {}) {
  if (topologies.empty()) return {};

  const double g0 = charge_gain(topologies.front(), res, res.t_ref);
  for (const auto& t : topologies) {
    const double g = charge_gain(t, res, res.t_ref);
    if (std::abs(g - g0) > opt.gain_tolerance * std::abs(g0))
      throw ConfigError("topology '" + std::string(kind_name(t)) + "' gain " +
                        std::to_string(g) + " V/C differs from " + std::to_string(g0) +
                        " V/C; comparison needs gain-normalized topologies");
  }

  std::vector<ComparisonRow> rows;
  rows.reserve(topologies.size());
  for (const auto& t : topologies) {
    ChainConfig cfg;
    cfg.resonator = res;
    cfg.topology = t;
    cfg.amp = amp;
    const SweepSeries s = thermal_sweep(cfg, opt.t_min, opt.t_max, opt.t_max - opt.t_min, 0.0);

    ComparisonRow row;
    row.topology = std::string(kind_name(t));
    row.noise_density =
        output_noise_psd(t, res, amp, res.carrier_hz(), opt.t_abs, res.t_ref).total_rss;
    row.drift_ppm = std::abs(s.pair_ratio_drift_ppm.value_or(s.total_drift_ppm));
    const TopologyTraits tr = traits_of(kind_of(t));
    row.integrable = tr.integrable;
    row.simplicity = tr.simple;
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.noise_density != b.noise_density) return a.noise_density < b.noise_density;
    return a.drift_ppm < b.drift_ppm;
  });
  return rows;
}

/// Shared values from which the five equal-output topologies are built.
struct NormalizationBase {
  TempcoValue r_fb{10e6, 30.0, 25.0};
  double cap_tempco_ppm = 30.0;
  TempcoValue c_p{2e-12, 200.0, 25.0};
  double sc_clock = 0.0;  // Hz; 0 selects four times the carrier
};

/// Current amplifier with r_fb, charge-type amplifiers with C_FB = 1/(R_FB w_x),
/// and a voltage amplifier whose G matches the same gain at t_ref.
inline std::vector<Topology> gain_normalized_set(const ResonatorParams& res,
                                                 const NormalizationBase& base = {}) {
  const double c_fb = equal_output_cfb(base.r_fb.nominal, res.omega_x);
  const TempcoValue cap{c_fb, base.cap_tempco_ppm, res.t_ref};
  const double f_s = base.sc_clock > 0.0 ? base.sc_clock : 4.0 * res.carrier_hz();
  return {
      CurrentAmp{base.r_fb},
      ChargeAmp{cap, base.r_fb},
      VoltageAmp{base.r_fb, base.c_p, (res.c0 + base.c_p.nominal) / c_fb},
      DiffChargeAmp{MatchedGroup{"cfb_pair", {c_fb, c_fb}, base.cap_tempco_ppm, res.t_ref},
                    base.r_fb},
      SwitchedCapAmp{cap, f_s, base.r_fb},
  };
}

/// Feedback capacitance in [c_lo, c_hi] at which a charge amplifier's total
/// output density at frequency f equals target (V/sqrt(Hz)). Output density
/// falls monotonically with C_FB, so bisection suffices.
inline double calibrate_feedback_capacitance(const ResonatorParams& res, const OpAmpModel& amp,
                                             const TempcoValue& r_fb, double target, double f,
                                             double c_lo, double c_hi,
                                             double t_abs = kDefaultTabs) {
  auto density = [&](double c) {
    return output_noise_psd(ChargeAmp{fixed(c), r_fb}, res, amp, f, t_abs, res.t_ref).total_rss;
  };
  if ((density(c_lo) - target) * (density(c_hi) - target) > 0.0)
    throw std::domain_error("target density not bracketed by the capacitance range");
  for (int i = 0; i < 200 && (c_hi - c_lo) > 1e-9 * c_hi; ++i) {
    const double mid = 0.5 * (c_lo + c_hi);
    if (density(mid) > target)
      c_lo = mid;
    else
      c_hi = mid;
  }
  return 0.5 * (c_lo + c_hi);
}

}  // namespace gyro_afe
