#pragma once

#include <cmath>
#include <numbers>

#include "gyro_afe/components.hpp"
#include "gyro_afe/preamp.hpp"
#include "gyro_afe/signal_model.hpp"

namespace gyro_afe {

/// Preamplifier pair, subtractor and synchronous demodulator.
struct ChainConfig {
  ResonatorParams resonator;
  Topology topology = ChargeAmp{};
  OpAmpModel amp;
  double demod_phase_error = 0.0;   // rad
  double lowpass_bandwidth = 1e3;   // Hz

  bool valid() const {
    return resonator.valid() && gyro_afe::valid(topology) && amp.valid() &&
           lowpass_bandwidth > 0.0 && std::abs(demod_phase_error) < std::numbers::pi;
  }
};

struct RateOutput {
  double dc_value = 0.0;             // V
  double quadrature_residual = 0.0;  // V
};

/// Subtractor stage. Anything common to both electrodes cancels.
inline Phasor differential(const ChargePair& q) { return q.plus - q.minus; }

struct Demodulated {
  double dc = 0.0;
  double quad = 0.0;
};

/// Multiply by sin(w_x t + phase_error) (and its cos partner) then ideal
/// low-pass; the 1/2 comes from the mean of sin^2.
inline Demodulated demodulate(const Phasor& p, double phase_error) {
  const double c = std::cos(phase_error);
  const double s = std::sin(phase_error);
  return {
      0.5 * (p.in_phase * c + p.quadrature * s),
      0.5 * (-p.in_phase * s + p.quadrature * c),
  };
}

inline RateOutput rate_output(const ChainConfig& cfg, double rate, double temp_c = 25.0) {
  const double g = charge_gain(cfg.topology, cfg.resonator, temp_c);
  const Demodulated d =
      demodulate(differential(charge_phasors(cfg.resonator, rate)), cfg.demod_phase_error);
  return {g * d.dc, g * d.quad};
}

/// d(dc_value)/d(rate), V per rad/s.
inline double scale_factor(const ChainConfig& cfg, double temp_c = 25.0) {
  return charge_gain(cfg.topology, cfg.resonator, temp_c) * cfg.resonator.rate_sensitivity *
         std::cos(cfg.demod_phase_error);
}

}  // namespace gyro_afe
