#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gyro_afe/errors.hpp"

namespace gyro_afe {

/// A component value with a linear temperature coefficient.
///
/// value(T) = nominal * (1 + tempco_ppm * 1e-6 * (T - t_ref)). Higher-order
/// terms are not modelled.
struct TempcoValue {
  double nominal = 0.0;     // SI units at t_ref
  double tempco_ppm = 0.0;  // ppm/°C
  double t_ref = 25.0;      // °C

  bool operator==(const TempcoValue&) const = default;
};

inline double value_at(const TempcoValue& v, double temp_c) {
  return v.nominal * (1.0 + v.tempco_ppm * 1e-6 * (temp_c - v.t_ref));
}

inline TempcoValue fixed(double nominal) { return TempcoValue{nominal, 0.0, 25.0}; }

/// White-noise op-amp model. Densities are frequency independent.
struct OpAmpModel {
  double en = 0.0;                // V/sqrt(Hz)
  double in = 0.0;                // A/sqrt(Hz)
  double open_loop_gain = 1e5;

  bool operator==(const OpAmpModel&) const = default;

  bool valid() const { return en >= 0.0 && in >= 0.0 && open_loop_gain > 1.0; }
};

/// Components that share one tempco realization, so their ratios do not
/// move with temperature.
struct MatchedGroup {
  std::string label;
  std::vector<double> nominals;
  double tempco_ppm = 0.0;
  double t_ref = 25.0;

  bool operator==(const MatchedGroup&) const = default;

  std::size_t size() const { return nominals.size(); }

  TempcoValue member(std::size_t i) const {
    if (i >= nominals.size())
      throw IndexError("matched group '" + label + "': index " + std::to_string(i) +
                       " out of range (size " + std::to_string(nominals.size()) + ")");
    return TempcoValue{nominals[i], tempco_ppm, t_ref};
  }
};

inline double value_at(const MatchedGroup& g, std::size_t i, double temp_c) {
  return value_at(g.member(i), temp_c);
}

// The shared thermal factor is applied once to the nominal ratio rather
// than to each member, so the result does not depend on temp_c at all.
inline double matched_ratio_at(const MatchedGroup& g, std::size_t i, std::size_t j,
                               double temp_c) {
  const TempcoValue a = g.member(i);
  const TempcoValue b = g.member(j);
  const double common = 1.0 + g.tempco_ppm * 1e-6 * (temp_c - g.t_ref);
  return (a.nominal * common) / (b.nominal * common);
}

/// Ratio of two independently drifting components.
inline double ratio_at(const TempcoValue& a, const TempcoValue& b, double temp_c) {
  return value_at(a, temp_c) / value_at(b, temp_c);
}

}  // namespace gyro_afe
