#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <complex>
#include <cstdint>
#include <limits>
#include <utility>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gyro_afe/chain.hpp"
#include "gyro_afe/errors.hpp"
#include "gyro_afe/fft.hpp"
#include "gyro_afe/preamp.hpp"

namespace gyro_afe {

// Time-domain oracle for the analytic noise model. The noise sources are
// rebuilt here from the raw component values rather than taken from
// input_noise_psd: currents are integrated into charge sample by sample,
// voltage and kT/C sources are injected as equivalent charges.

struct SourceMask {
  bool johnson = true;
  bool opamp_current = true;
  bool opamp_voltage = true;
  bool ktc = true;

  static SourceMask none() { return {false, false, false, false}; }
  bool operator==(const SourceMask&) const = default;
};

struct SimOptions {
  std::uint64_t seed = 1;
  double fs = 0.0;        // Hz
  double duration = 0.0;  // s
  double rate = 0.0;      // rad/s applied to the resonator
  double temp_c = 25.0;   // °C for gains
  double t_abs = kDefaultTabs;
  SourceMask sources;
};

struct SimRun {
  std::uint64_t seed = 0;
  double fs = 0.0;
  double duration = 0.0;
  std::vector<double> trace;  // demodulated, low-passed output, V
};

namespace detail {

// Raw noise parameters of one topology, referred to the summing node.
struct SourceModel {
  double summing_resistance = 0.0;  // ohm, Johnson source; 0 disables
  double voltage_to_charge = 0.0;   // F, e_n -> equivalent input charge
  double ktc_variance_per_clock = 0.0;  // C^2 per switch cycle
  double switch_clock = 0.0;        // Hz
};

inline SourceModel source_model(const Topology& topo, const ResonatorParams& res,
                                double t_abs) {
  const double w = res.omega_x;
  auto par = [](double a, double b) { return 1.0 / (1.0 / a + 1.0 / b); };
  SourceModel m;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CurrentAmp>) {
          m.summing_resistance = par(t.r_fb.nominal, res.ro);
          // e_n appears across C0 and drives e_n/R_FB through the feedback;
          // both terms are lumped in phase with the summing-node charge.
          m.voltage_to_charge = res.c0 + 1.0 / (t.r_fb.nominal * w);
        } else if constexpr (std::is_same_v<T, VoltageAmp>) {
          m.summing_resistance = t.r.nominal;
          m.voltage_to_charge = res.c0;
        } else if constexpr (std::is_same_v<T, ChargeAmp>) {
          m.summing_resistance = par(t.r_fb.nominal, res.ro);
          m.voltage_to_charge = res.c0 + t.c_fb.nominal;
        } else if constexpr (std::is_same_v<T, DiffChargeAmp>) {
          m.summing_resistance = par(t.r_fb.nominal, res.ro);
          m.voltage_to_charge = res.c0 + t.c_fb_pair.nominals.at(0);
        } else {
          m.summing_resistance = par(t.r_fb.nominal, res.ro);
          m.voltage_to_charge = res.c0 + t.c_fb.nominal;
          m.ktc_variance_per_clock = kBoltzmann * t_abs * t.c_fb.nominal;
          m.switch_clock = t.f_s;
        }
      },
      topo);
  return m;
}

inline std::size_t samples_per_carrier(double fs, double omega_x) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fs * 2.0 * std::numbers::pi / omega_x)));
}

inline double lowpass_alpha(double bandwidth, double fs) {
  return 1.0 - std::exp(-2.0 * std::numbers::pi * bandwidth / fs);
}

}  // namespace detail

/// Runs the sampled chain: electrode charges plus noise, preamp gain,
/// mixing with sin(w_x t + phase_error), a one-carrier-period moving average
/// and a single-pole low-pass at cfg.lowpass_bandwidth.
///
/// A warm-up of ten low-pass time constants precedes the recorded trace.
/// The moving average nulls the 2 w_x mixing product exactly when fs is an
/// integer multiple of the carrier frequency.
inline SimRun simulate(const ChainConfig& cfg, const SimOptions& opt) {
  const ResonatorParams& res = cfg.resonator;
  const double f_x = res.carrier_hz();
  if (!(opt.fs >= 20.0 * f_x * (1.0 - 1e-12)))
    throw SamplingError("sample rate must be at least 20x the carrier frequency (" +
                        std::to_string(20.0 * f_x) + " Hz)");
  if (!(opt.duration > 0.0) || opt.fs * opt.duration < 4096.0)
    throw DurationError("simulation needs at least 4096 samples");

  const double fs = opt.fs;
  const double dt = 1.0 / fs;
  const std::size_t n_out = sample_count(fs, opt.duration);

  const detail::SourceModel src = detail::source_model(cfg.topology, res, opt.t_abs);
  const double four_kt = 4.0 * kBoltzmann * opt.t_abs;

  // Per-sample standard deviations for single-sided densities d: d^2 fs / 2.
  const double half_fs = 0.5 * fs;
  const double sd_johnson = (opt.sources.johnson && src.summing_resistance > 0.0)
                                ? std::sqrt(four_kt / src.summing_resistance * half_fs)
                                : 0.0;
  const double sd_in = opt.sources.opamp_current ? std::sqrt(cfg.amp.in * cfg.amp.in * half_fs)
                                                 : 0.0;
  const double sd_en = opt.sources.opamp_voltage ? std::sqrt(cfg.amp.en * cfg.amp.en * half_fs)
                                                 : 0.0;
  // kT/C charge of variance kTC per switch cycle, spread white over f_s / 2.
  const double sd_ktc = (opt.sources.ktc && src.switch_clock > 0.0)
                            ? std::sqrt(src.ktc_variance_per_clock * fs / src.switch_clock)
                            : 0.0;

  // Leaky integrator turning summing-node current into charge. The leak sits
  // well below the carrier; the input scale undoes the forward-Euler gain
  // error at w_x so the carrier response is 1/w_x.
  const double theta = res.omega_x * dt;
  const double leak = std::exp(-res.omega_x / 30.0 * dt);
  const double euler_fix = 2.0 * std::sin(0.5 * theta) / theta;

  const double gain = charge_gain(cfg.topology, res, opt.temp_c);
  const Phasor signal = differential(charge_phasors(res, opt.rate));

  const std::size_t box_len = detail::samples_per_carrier(fs, res.omega_x);
  const double alpha = detail::lowpass_alpha(cfg.lowpass_bandwidth, fs);
  const double tau_samples = fs / (2.0 * std::numbers::pi * cfg.lowpass_bandwidth);
  const double leak_samples = 30.0 / res.omega_x * fs;
  const auto warmup = static_cast<std::size_t>(
      std::ceil(10.0 * std::max(tau_samples, leak_samples))) + box_len;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool any_current = sd_johnson > 0.0 || sd_in > 0.0;

  std::vector<double> box(box_len, 0.0);
  std::size_t box_pos = 0;
  std::size_t box_filled = 0;
  double box_sum = 0.0;
  double q_int = 0.0;
  double lp = 0.0;
  bool lp_started = false;

  SimRun run;
  run.seed = opt.seed;
  run.fs = fs;
  run.duration = opt.duration;
  run.trace.reserve(n_out);

  const std::size_t total = warmup + n_out;
  for (std::size_t n = 0; n < total; ++n) {
    const double t = static_cast<double>(n) * dt;

    double q = signal.at(res.omega_x, t);
    if (any_current) {
      double i = 0.0;
      if (sd_johnson > 0.0) i += sd_johnson * normal(rng);
      if (sd_in > 0.0) i += sd_in * normal(rng);
      q_int = leak * q_int + i * euler_fix * dt;
      q += q_int;
    }
    if (sd_en > 0.0) q += src.voltage_to_charge * sd_en * normal(rng);
    if (sd_ktc > 0.0) q += sd_ktc * normal(rng);

    const double mixed = gain * q * std::sin(res.omega_x * t + cfg.demod_phase_error);

    box_sum += mixed - box[box_pos];
    box[box_pos] = mixed;
    box_pos = (box_pos + 1) % box_len;
    if (box_filled < box_len) {
      ++box_filled;
      if (box_filled < box_len) continue;
    }
    if (box_pos == 0) {
      // Re-sum once per period so rounding in the running sum cannot build up.
      box_sum = 0.0;
      for (double v : box) box_sum += v;
    }
    const double avg = box_sum / static_cast<double>(box_len);

    if (!lp_started) {
      lp = avg;
      lp_started = true;
    } else {
      lp += alpha * (avg - lp);
    }
    if (n >= warmup) run.trace.push_back(lp);
  }
  return run;
}

/// Averaged periodogram, single-sided, in V/sqrt(Hz).
struct PsdEstimate {
  std::vector<double> frequencies;
  std::vector<double> densities;
  std::size_t segment_count = 0;
};

/// Hann-windowed Welch estimate with per-segment mean removal. A white
/// sequence of single-sided density d gives a flat estimate near d.
inline PsdEstimate estimate_psd(std::span<const double> x, double fs, std::size_t segment_len,
                                double overlap = 0.5) {
  if (segment_len < 2 || segment_len > x.size())
    throw SegmentError("segment length " + std::to_string(segment_len) +
                       " must be in [2, " + std::to_string(x.size()) + "]");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw SegmentError("overlap must be in [0, 1)");

  const std::size_t L = segment_len;
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(L) * (1.0 - overlap))));
  const std::size_t segments = (x.size() - L) / hop + 1;
  const std::size_t bins = L / 2 + 1;

  std::vector<double> window(L);
  double w2 = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(L));
    w2 += window[i] * window[i];
  }

  detail::RealFft fft(L);
  std::vector<double> power(bins, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const auto seg = x.subspan(s * hop, L);
    double mean = 0.0;
    for (double v : seg) mean += v;
    mean /= static_cast<double>(L);
    auto in = fft.input();
    for (std::size_t i = 0; i < L; ++i) in[i] = (seg[i] - mean) * window[i];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) power[k] += std::norm(fft.bin(k));
  }

  PsdEstimate est;
  est.segment_count = segments;
  est.frequencies.resize(bins);
  est.densities.resize(bins);
  const double norm = 1.0 / (fs * w2 * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (L % 2 == 0 && k == L / 2);
    est.frequencies[k] = static_cast<double>(k) * fs / static_cast<double>(L);
    est.densities[k] = std::sqrt((edge ? 1.0 : 2.0) * power[k] * norm);
  }
  return est;
}

inline PsdEstimate estimate_psd(const SimRun& run, std::size_t segment_len,
                                double overlap = 0.5) {
  return estimate_psd(run.trace, run.fs, segment_len, overlap);
}

struct SourceCheck {
  std::string source;
  double analytic = 0.0;   // V/sqrt(Hz) at the preamp output
  double estimated = 0.0;  // V/sqrt(Hz), recovered from the demodulated trace
  double rel_error = 0.0;
};

struct VerifyReport {
  std::vector<SourceCheck> sources;
  SourceCheck total;
  std::size_t segment_count = 0;

  double worst_error() const {
    double e = total.rel_error;
    for (const auto& s : sources) e = std::max(e, s.rel_error);
    return e;
  }
};

namespace detail {

// Largest power-of-two segment that still yields min_segments at 50% overlap.
inline std::size_t verify_segment_len(std::size_t n, std::size_t min_segments) {
  std::size_t len = 16;
  while ((n - 2 * len) / len + 1 >= min_segments && 2 * len <= n) len *= 2;
  return len;
}

// Magnitude response of the moving average and the single-pole low-pass.
inline double chain_response(double f, double fs, std::size_t box_len, double alpha) {
  const double x = std::numbers::pi * f / fs;
  const double m = static_cast<double>(box_len);
  const double box = f == 0.0 ? 1.0 : std::abs(std::sin(m * x) / (m * std::sin(x)));
  const std::complex<double> z = std::polar(1.0, -2.0 * x);
  const double lp = std::abs(alpha / (1.0 - (1.0 - alpha) * z));
  return box * lp;
}

// Preamp-output density recovered from the baseband of a demodulated trace.
// Mixing with a unit sine leaves d/sqrt(2) in the in-phase baseband.
inline std::pair<double, std::size_t> recovered_density(const SimRun& run,
                                                        const ChainConfig& cfg) {
  const std::size_t len = verify_segment_len(run.trace.size(), 64);
  const PsdEstimate est = estimate_psd(run, len, 0.5);
  const std::size_t box_len = samples_per_carrier(run.fs, cfg.resonator.omega_x);
  const double alpha = lowpass_alpha(cfg.lowpass_bandwidth, run.fs);
  const double f_hi = 0.5 * cfg.lowpass_bandwidth;

  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 2; k < est.frequencies.size() && est.frequencies[k] <= f_hi; ++k) {
    const double h = chain_response(est.frequencies[k], run.fs, box_len, alpha);
    acc += est.densities[k] * est.densities[k] / (h * h);
    ++used;
  }
  if (used < 3)
    throw SegmentError("low-pass bandwidth too narrow for the frequency resolution of " +
                       std::to_string(est.frequencies[1]) + " Hz");
  return {std::sqrt(2.0 * acc / static_cast<double>(used)), est.segment_count};
}

inline double relative_error(double estimate, double reference) {
  if (reference == 0.0) return estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(estimate - reference) / reference;
}

}  // namespace detail

/// Simulates each noise source alone and then all together, and compares
/// the recovered densities with output_noise_psd at the carrier.
inline VerifyReport verify_against_analytic(const ChainConfig& cfg, const SimOptions& opt) {
  const NoiseBreakdown analytic = output_noise_psd(cfg.topology, cfg.resonator, cfg.amp,
                                                   cfg.resonator.carrier_hz(), opt.t_abs,
                                                   opt.temp_c);
  VerifyReport report;

  auto run_with = [&](SourceMask mask, const std::string& name, double reference) {
    SimOptions o = opt;
    o.sources = mask;
    const SimRun run = simulate(cfg, o);
    SourceCheck c;
    c.source = name;
    c.analytic = reference;
    if (reference == 0.0 && mask == SourceMask::none()) {
      c.estimated = 0.0;
    } else {
      auto [d, segs] = detail::recovered_density(run, cfg);
      c.estimated = d;
      report.segment_count = segs;
    }
    c.rel_error = detail::relative_error(c.estimated, c.analytic);
    return c;
  };

  struct Entry {
    const char* name;
    bool SourceMask::*flag;
    double value;
  };
  const Entry entries[] = {
      {"johnson", &SourceMask::johnson, analytic.johnson},
      {"opamp_current", &SourceMask::opamp_current, analytic.opamp_current},
      {"opamp_voltage", &SourceMask::opamp_voltage, analytic.opamp_voltage},
      {"ktc", &SourceMask::ktc, analytic.ktc},
  };

  SourceMask all = SourceMask::none();
  for (const Entry& e : entries) {
    if (!(opt.sources.*e.flag) || e.value == 0.0) continue;
    SourceMask only = SourceMask::none();
    only.*e.flag = true;
    all.*e.flag = true;
    report.sources.push_back(run_with(only, e.name, e.value));
  }

  double total_ref = 0.0;
  for (const auto& s : report.sources) total_ref += s.analytic * s.analytic;
  report.total = run_with(all, "total", std::sqrt(total_ref));
  return report;
}

}  // namespace gyro_afe
