#pragma once

#include <cmath>
#include <numbers>
#include <string_view>
#include <type_traits>
#include <variant>

#include "gyro_afe/components.hpp"
#include "gyro_afe/signal_model.hpp"

namespace gyro_afe {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kDefaultTabs = 300.0;       // K

// Transimpedance stage: V = R_FB * w * (q+ - q-).
struct CurrentAmp {
  TempcoValue r_fb;
  bool operator==(const CurrentAmp&) const = default;
};

// Feedback capacitor sets the gain; R_FB only bleeds DC.
struct ChargeAmp {
  TempcoValue c_fb;
  TempcoValue r_fb;
  bool operator==(const ChargeAmp&) const = default;
};

// High-impedance input across C0 (plus parasitic C_p), R discharges the node.
struct VoltageAmp {
  TempcoValue r;
  TempcoValue c_p;
  double gain = 1.0;
  bool operator==(const VoltageAmp&) const = default;
};

// Fully differential charge amplifier; c_fb_pair members 0 and 1 are the
// feedback capacitors of the + and - electrode.
struct DiffChargeAmp {
  MatchedGroup c_fb_pair;
  TempcoValue r_fb;
  bool operator==(const DiffChargeAmp&) const = default;
};

// Charge amplifier reset by switches at f_s. r_fb is the residual DC path
// (switch off-resistance / bias network) seen at the summing node.
struct SwitchedCapAmp {
  TempcoValue c_fb;
  double f_s = 0.0;
  TempcoValue r_fb;
  bool operator==(const SwitchedCapAmp&) const = default;
};

using Topology = std::variant<CurrentAmp, ChargeAmp, VoltageAmp, DiffChargeAmp, SwitchedCapAmp>;

enum class TopologyKind { Current, Charge, Voltage, DiffCharge, SwitchedCap };

inline TopologyKind kind_of(const Topology& t) {
  return static_cast<TopologyKind>(t.index());
}

inline std::string_view kind_name(TopologyKind k) {
  switch (k) {
    case TopologyKind::Current: return "current";
    case TopologyKind::Charge: return "charge";
    case TopologyKind::Voltage: return "voltage";
    case TopologyKind::DiffCharge: return "diffcharge";
    case TopologyKind::SwitchedCap: return "sc";
  }
  return "?";
}

inline std::string_view kind_name(const Topology& t) { return kind_name(kind_of(t)); }

/// Static integration/simplicity ratings of each topology.
struct TopologyTraits {
  bool integrable;
  bool simple;
};

inline TopologyTraits traits_of(TopologyKind k) {
  switch (k) {
    case TopologyKind::Current: return {false, true};  // 10 MOhm feedback is not integrable
    case TopologyKind::Charge: return {true, true};
    case TopologyKind::Voltage: return {true, true};
    case TopologyKind::DiffCharge: return {true, false};
    case TopologyKind::SwitchedCap: return {true, false};
  }
  return {false, false};
}

inline bool valid(const Topology& topo) {
  auto pos = [](const TempcoValue& v) { return v.nominal > 0.0 && std::isfinite(v.tempco_ppm); };
  return std::visit(
      [&](const auto& t) -> bool {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CurrentAmp>) {
          return pos(t.r_fb);
        } else if constexpr (std::is_same_v<T, ChargeAmp>) {
          return pos(t.c_fb) && pos(t.r_fb);
        } else if constexpr (std::is_same_v<T, VoltageAmp>) {
          return pos(t.r) && t.c_p.nominal >= 0.0 && t.gain > 0.0;
        } else if constexpr (std::is_same_v<T, DiffChargeAmp>) {
          return t.c_fb_pair.size() == 2 && t.c_fb_pair.nominals[0] > 0.0 &&
                 t.c_fb_pair.nominals[1] > 0.0 && pos(t.r_fb);
        } else {
          return pos(t.c_fb) && t.f_s > 0.0 && pos(t.r_fb);
        }
      },
      topo);
}

/// Charge-to-voltage gain (V/C) applied to q+ - q- at temperature temp_c.
inline double charge_gain(const Topology& topo, const ResonatorParams& res, double temp_c) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CurrentAmp>) {
          return value_at(t.r_fb, temp_c) * res.omega_at(temp_c);
        } else if constexpr (std::is_same_v<T, ChargeAmp> || std::is_same_v<T, SwitchedCapAmp>) {
          return 1.0 / value_at(t.c_fb, temp_c);
        } else if constexpr (std::is_same_v<T, VoltageAmp>) {
          return t.gain / (res.c0 + value_at(t.c_p, temp_c));
        } else {
          // Mean of the two electrode gains; equals 1/C_FB when the pair is balanced.
          return 0.5 * (1.0 / value_at(t.c_fb_pair, 0, temp_c) +
                        1.0 / value_at(t.c_fb_pair, 1, temp_c));
        }
      },
      topo);
}

/// Feedback capacitance giving a charge amplifier the same output as a
/// current amplifier with feedback resistance r_fb at omega.
inline double equal_output_cfb(double r_fb, double omega) { return 1.0 / (r_fb * omega); }

enum class NoiseUnits { CoulombPerRootHz, VoltPerRootHz };

/// Spectral densities of the independent noise sources of one preamplifier.
struct NoiseBreakdown {
  double johnson = 0.0;
  double opamp_current = 0.0;
  double opamp_voltage = 0.0;
  double ktc = 0.0;
  double total_rss = 0.0;
  NoiseUnits units = NoiseUnits::CoulombPerRootHz;

  void update_total() {
    total_rss = std::sqrt(johnson * johnson + opamp_current * opamp_current +
                          opamp_voltage * opamp_voltage + ktc * ktc);
  }
};

inline double parallel(double a, double b) { return a * b / (a + b); }

/// Input-referred charge noise densities (C/sqrt(Hz)) at frequency f.
///
/// Sources are independent and combined root-sum-square:
///   current      sqrt(4kT/(R_FB||Ro))/w,  i_n/w,  e_n*C0 + e_n/(R_FB*w)
///   voltage      sqrt(4kT/R)/w,           i_n/w,  e_n*C0
///   charge/diff  sqrt(4kT/(R_FB||Ro))/w,  i_n/w,  e_n*(C0 + C_FB)
///   sc           charge terms plus sampled kT/C folded into f_s/2: sqrt(2kT*C_FB/f_s)
/// Component values are taken at their nominal (t_ref) values.
inline NoiseBreakdown input_noise_psd(const Topology& topo, const ResonatorParams& res,
                                      const OpAmpModel& amp, double f,
                                      double t_abs = kDefaultTabs) {
  const double w = 2.0 * std::numbers::pi * f;
  const double four_kt = 4.0 * kBoltzmann * t_abs;
  NoiseBreakdown nb;
  nb.opamp_current = amp.in / w;

  auto charge_terms = [&](double c_fb, double r_fb) {
    nb.johnson = std::sqrt(four_kt / parallel(r_fb, res.ro)) / w;
    nb.opamp_voltage = amp.en * (res.c0 + c_fb);
  };

  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CurrentAmp>) {
          const double r_fb = t.r_fb.nominal;
          nb.johnson = std::sqrt(four_kt / parallel(r_fb, res.ro)) / w;
          nb.opamp_voltage = amp.en * res.c0 + amp.en / (r_fb * w);
        } else if constexpr (std::is_same_v<T, VoltageAmp>) {
          nb.johnson = std::sqrt(four_kt / t.r.nominal) / w;
          nb.opamp_voltage = amp.en * res.c0;
        } else if constexpr (std::is_same_v<T, ChargeAmp>) {
          charge_terms(t.c_fb.nominal, t.r_fb.nominal);
        } else if constexpr (std::is_same_v<T, DiffChargeAmp>) {
          charge_terms(t.c_fb_pair.member(0).nominal, t.r_fb.nominal);
        } else {
          charge_terms(t.c_fb.nominal, t.r_fb.nominal);
          nb.ktc = std::sqrt(2.0 * kBoltzmann * t_abs * t.c_fb.nominal / t.f_s);
        }
      },
      topo);

  nb.update_total();
  return nb;
}

/// Output-referred densities (V/sqrt(Hz)): input densities scaled by |gain(temp_c)|.
inline NoiseBreakdown output_noise_psd(const Topology& topo, const ResonatorParams& res,
                                       const OpAmpModel& amp, double f,
                                       double t_abs = kDefaultTabs, double temp_c = 25.0) {
  NoiseBreakdown nb = input_noise_psd(topo, res, amp, f, t_abs);
  const double g = std::abs(charge_gain(topo, res, temp_c));
  nb.johnson *= g;
  nb.opamp_current *= g;
  nb.opamp_voltage *= g;
  nb.ktc *= g;
  nb.units = NoiseUnits::VoltPerRootHz;
  nb.update_total();
  return nb;
}

}  // namespace gyro_afe
