#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gyro_afe/signal_model.hpp"

using namespace gyro_afe;

namespace {

ResonatorParams params(double sq, double c_amp, double m_amp) {
  ResonatorParams p;
  p.rate_sensitivity = sq;
  p.coupling_cap = c_amp;
  p.coupling_mech = m_amp;
  return p;
}

}  // namespace

TEST(DriveVoltage, Examples) {
  EXPECT_DOUBLE_EQ(drive_voltage({1.0, 0.0, 2e5}, 0.0), 1.0);
  EXPECT_NEAR(drive_voltage({1.0, std::numbers::pi / 2, 2e5}, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(drive_voltage({0.5, 0.0, 2e5}, std::numbers::pi / 2e5), -0.5, 1e-15);
}

TEST(ChargePhasors, ZeroRateLeavesCouplings) {
  const ChargePair q = charge_phasors(params(1e-16, 1e-15, 5e-16), 0.0);
  EXPECT_DOUBLE_EQ(q.plus.in_phase, 1e-15);
  EXPECT_DOUBLE_EQ(q.plus.quadrature, 5e-16);
  EXPECT_DOUBLE_EQ(q.minus.in_phase, 1e-15);
  EXPECT_DOUBLE_EQ(q.minus.quadrature, -5e-16);
}

TEST(ChargePhasors, PureCoriolisIsAntisymmetric) {
  const ChargePair q = charge_phasors(params(1e-16, 0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(q.plus.in_phase, 1e-16);
  EXPECT_DOUBLE_EQ(q.plus.quadrature, 0.0);
  EXPECT_DOUBLE_EQ(q.minus.in_phase, -1e-16);
  EXPECT_DOUBLE_EQ(q.minus.quadrature, 0.0);
}

TEST(ChargePhasors, TermByTermSum) {
  const ChargePair q = charge_phasors(params(1e-16, 1e-15, 5e-16), 2.0);
  EXPECT_NEAR(q.plus.in_phase, 1.2e-15, 1e-30);
  EXPECT_DOUBLE_EQ(q.plus.quadrature, 5e-16);
  EXPECT_NEAR(q.minus.in_phase, 8e-16, 1e-30);
  EXPECT_DOUBLE_EQ(q.minus.quadrature, -5e-16);
}

TEST(ChargePhasors, Properties) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double sq = 1e-16 * (0.1 + u(rng));
    const double c_amp = 1e-15 * u(rng);
    const double m_amp = 1e-15 * u(rng);
    const double rate = 10.0 * (u(rng) - 0.5);

    const ChargePair a = charge_phasors(params(sq, 0.0, 0.0), rate);
    EXPECT_EQ(a.plus.in_phase, -a.minus.in_phase);
    EXPECT_EQ(a.plus.quadrature, -a.minus.quadrature);

    const ChargePair b = charge_phasors(params(sq, c_amp, m_amp), rate);
    EXPECT_NEAR(b.plus.in_phase + b.minus.in_phase, 2.0 * c_amp, 1e-12 * c_amp + 1e-40);
    EXPECT_NEAR((b.plus.in_phase - b.minus.in_phase) / 2.0, sq * rate,
                1e-12 * (std::abs(sq * rate) + c_amp));
  }
}

TEST(ChargeTimeseries, NoSourcesGivesZeros) {
  const ChargeSeries s = charge_timeseries(params(1e-16, 0.0, 0.0), 0.0, 1e6, 1e-3);
  for (double v : s.plus) EXPECT_EQ(v, 0.0);
  for (double v : s.minus) EXPECT_EQ(v, 0.0);
}

TEST(ChargeTimeseries, SampleCountAndFirstSample) {
  const ResonatorParams p = params(1e-16, 1e-15, 5e-16);
  const ChargeSeries s = charge_timeseries(p, 0.3, 1e6, 1e-3);
  EXPECT_EQ(s.plus.size(), 1000u);
  EXPECT_EQ(s.minus.size(), 1000u);
  EXPECT_EQ(s.plus[0], 5e-16);
  EXPECT_EQ(s.minus[0], -5e-16);
}

TEST(ChargeTimeseries, MatchesPhasorAtEverySample) {
  const ResonatorParams p = params(1e-16, 1e-15, 5e-16);
  const ChargeSeries s = charge_timeseries(p, 1.5, 2e6, 5e-4);
  const ChargePair q = charge_phasors(p, 1.5);
  for (std::size_t n = 0; n < s.plus.size(); n += 37) {
    const double t = static_cast<double>(n) / 2e6;
    EXPECT_DOUBLE_EQ(s.plus[n], q.plus.in_phase * std::sin(p.omega_x * t) +
                                    q.plus.quadrature * std::cos(p.omega_x * t));
  }
}

TEST(ChargeTimeseries, RateSignFlipsOnlyCoriolis) {
  const ResonatorParams p = params(1e-16, 1e-15, 5e-16);
  const ChargeSeries pos = charge_timeseries(p, 2.0, 1e6, 1e-4);
  const ChargeSeries neg = charge_timeseries(p, -2.0, 1e6, 1e-4);
  const ChargeSeries cor = charge_timeseries(params(1e-16, 0.0, 0.0), 2.0, 1e6, 1e-4);
  for (std::size_t n = 0; n < pos.plus.size(); ++n) {
    EXPECT_NEAR(pos.plus[n] - neg.plus[n], 2.0 * cor.plus[n], 1e-30);
    EXPECT_NEAR(pos.minus[n] - neg.minus[n], 2.0 * cor.minus[n], 1e-30);
  }
}

TEST(ChargeTimeseries, RejectsUndersampling) {
  const ResonatorParams p;  // omega_x = 2e5, Nyquist limit ~63.7 kHz
  EXPECT_THROW(charge_timeseries(p, 0.0, 6e4, 1e-3), SamplingError);
  EXPECT_THROW(charge_timeseries(p, 0.0, 1e6, 0.0), DurationError);
}
