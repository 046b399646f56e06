#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gyro_afe/errors.hpp"

namespace gyro_afe {

struct DriveState {
  double amplitude = 1.0;  // V
  double phase = 0.0;      // rad
  double omega_x = 2e5;    // rad/s
};

/// Drive voltage of the resonator, X cos(w_x t + phi).
inline double drive_voltage(const DriveState& s, double t) {
  return s.amplitude * std::cos(s.omega_x * t + s.phase);
}

/// Electrical and motional parameters of the vibrating gyro.
///
/// The detection charge on each electrode is a narrowband signal at omega_x:
/// a Coriolis part proportional to the rate, a capacitive coupling in phase
/// with it and a mechanical coupling in quadrature.
struct ResonatorParams {
  double c0 = 1e-12;                 // F, inter-electrode capacitance
  double ro = 1.5e6;                 // ohm, motional resistance
  double omega_x = 2e5;              // rad/s at t_ref
  double rate_sensitivity = 1e-16;   // C per rad/s
  double coupling_cap = 0.0;         // C, in-phase common-mode amplitude
  double coupling_mech = 0.0;        // C, quadrature amplitude
  double freq_tempco = 0.0;          // ppm/°C on omega_x
  double full_scale_rate = 1.7453292519943295;  // rad/s (100 °/s)
  double t_ref = 25.0;               // °C

  bool operator==(const ResonatorParams&) const = default;

  bool valid() const {
    return c0 > 0.0 && ro > 0.0 && omega_x > 0.0 && rate_sensitivity >= 0.0 &&
           coupling_cap >= 0.0 && coupling_mech >= 0.0 && full_scale_rate > 0.0 &&
           std::isfinite(freq_tempco);
  }

  double omega_at(double temp_c) const {
    return omega_x * (1.0 + freq_tempco * 1e-6 * (temp_c - t_ref));
  }

  double carrier_hz() const { return omega_x / (2.0 * std::numbers::pi); }
};

/// Couplings scaled from the full-scale Coriolis charge: 10x in phase,
/// 5x in quadrature.
inline ResonatorParams with_default_couplings(ResonatorParams p) {
  const double full_scale_charge = p.rate_sensitivity * p.full_scale_rate;
  p.coupling_cap = 10.0 * full_scale_charge;
  p.coupling_mech = 5.0 * full_scale_charge;
  return p;
}

/// in_phase multiplies sin(w_x t), quadrature multiplies cos(w_x t).
struct Phasor {
  double in_phase = 0.0;
  double quadrature = 0.0;

  double magnitude() const { return std::hypot(in_phase, quadrature); }

  friend Phasor operator+(Phasor a, Phasor b) {
    return {a.in_phase + b.in_phase, a.quadrature + b.quadrature};
  }
  friend Phasor operator-(Phasor a, Phasor b) {
    return {a.in_phase - b.in_phase, a.quadrature - b.quadrature};
  }
  friend Phasor operator*(double k, Phasor a) { return {k * a.in_phase, k * a.quadrature}; }
  bool operator==(const Phasor&) const = default;

  double at(double omega, double t) const {
    const double th = omega * t;
    return in_phase * std::sin(th) + quadrature * std::cos(th);
  }
};

struct ChargePair {
  Phasor plus;
  Phasor minus;
};

inline ChargePair charge_phasors(const ResonatorParams& p, double rate) {
  const double coriolis = p.rate_sensitivity * rate;
  return {
      Phasor{coriolis + p.coupling_cap, p.coupling_mech},
      Phasor{-coriolis + p.coupling_cap, -p.coupling_mech},
  };
}

struct ChargeSeries {
  std::vector<double> plus;
  std::vector<double> minus;
};

inline std::size_t sample_count(double fs, double duration) {
  return static_cast<std::size_t>(std::llround(fs * duration));
}

/// Samples both electrode charges at t = n / fs.
inline ChargeSeries charge_timeseries(const ResonatorParams& p, double rate, double fs,
                                      double duration) {
  if (!(fs > p.omega_x / std::numbers::pi))
    throw SamplingError("sample rate " + std::to_string(fs) +
                        " Hz is at or below the carrier Nyquist limit");
  if (!(duration > 0.0)) throw DurationError("duration must be positive");

  const ChargePair q = charge_phasors(p, rate);
  const std::size_t n = sample_count(fs, duration);
  ChargeSeries out;
  out.plus.resize(n);
  out.minus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    out.plus[i] = q.plus.at(p.omega_x, t);
    out.minus[i] = q.minus.at(p.omega_x, t);
  }
  return out;
}

}  // namespace gyro_afe
