#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gyro_afe/montecarlo.hpp"

using namespace gyro_afe;

namespace {

ChainConfig calibrated_chain() {
  ChainConfig c;
  c.resonator = with_default_couplings(ResonatorParams{});
  c.topology = ChargeAmp{TempcoValue{24.5e-12, 30.0, 25.0}, TempcoValue{10e6, 30.0, 25.0}};
  c.amp = OpAmpModel{5e-9, 1e-14, 1e5};
  c.lowpass_bandwidth = 1e3;
  return c;
}

SimOptions options(double duration, std::uint64_t seed = 1) {
  SimOptions o;
  o.seed = seed;
  o.fs = 20.0 * ResonatorParams{}.carrier_hz();
  o.duration = duration;
  return o;
}

}  // namespace

TEST(Simulate, SilentChainGivesZeroTrace) {
  ChainConfig c = calibrated_chain();
  c.resonator.coupling_cap = 0.0;
  c.resonator.coupling_mech = 0.0;
  SimOptions o = options(0.01);
  o.sources = SourceMask::none();
  const SimRun run = simulate(c, o);
  EXPECT_EQ(run.trace.size(), sample_count(o.fs, o.duration));
  for (double v : run.trace) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, NoiselessMatchesPhasorModel) {
  for (double phase : {0.0, 0.2}) {
    ChainConfig c = calibrated_chain();
    c.demod_phase_error = phase;
    SimOptions o = options(0.02);
    o.sources = SourceMask::none();
    o.rate = 1.0;
    const SimRun run = simulate(c, o);
    const double dc = rate_output(c, 1.0).dc_value;
    for (double v : run.trace) EXPECT_NEAR(v, dc, 1e-9 * std::abs(dc));
  }
}

TEST(Simulate, DeterministicPerSeed) {
  const ChainConfig c = calibrated_chain();
  const SimRun a = simulate(c, options(0.02, 5));
  const SimRun b = simulate(c, options(0.02, 5));
  const SimRun d = simulate(c, options(0.02, 6));
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_NE(a.trace, d.trace);
}

TEST(Simulate, Preconditions) {
  const ChainConfig c = calibrated_chain();
  SimOptions o = options(0.02);
  o.fs = 10.0 * c.resonator.carrier_hz();
  EXPECT_THROW(simulate(c, o), SamplingError);
  o = options(1000.0 / (20.0 * c.resonator.carrier_hz()));
  EXPECT_THROW(simulate(c, o), DurationError);
}

TEST(EstimatePsd, WhiteNoiseIsFlat) {
  const double density = 1e-8, fs = 1e5;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, density * std::sqrt(fs / 2.0));
  std::vector<double> x(1 << 18);
  for (double& v : x) v = n(rng);
  const PsdEstimate p = estimate_psd(x, fs, 1024, 0.5);
  ASSERT_GE(p.segment_count, 64u);
  const double bound = 3.0 / std::sqrt(static_cast<double>(p.segment_count));
  double mean = 0.0;
  for (std::size_t k = 1; k + 1 < p.densities.size(); ++k) {
    EXPECT_NEAR(p.densities[k], density, bound * density) << "bin " << k;
    mean += p.densities[k];
  }
  mean /= static_cast<double>(p.densities.size() - 2);
  EXPECT_NEAR(mean, density, 0.01 * density);
  EXPECT_DOUBLE_EQ(p.frequencies[1] - p.frequencies[0], fs / 1024.0);
}

TEST(EstimatePsd, SinusoidConcentratesInOneBin) {
  const double fs = 1024.0;
  std::vector<double> x(8192);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * std::numbers::pi * 64.0 * static_cast<double>(i) / fs);
  const PsdEstimate p = estimate_psd(x, fs, 512, 0.5);
  const auto peak = static_cast<std::size_t>(
      std::max_element(p.densities.begin(), p.densities.end()) - p.densities.begin());
  EXPECT_DOUBLE_EQ(p.frequencies[peak], 64.0);
  double total = 0.0, near = 0.0;
  for (std::size_t k = 0; k < p.densities.size(); ++k) {
    const double pw = p.densities[k] * p.densities[k];
    total += pw;
    if (k + 1 >= peak && k <= peak + 1) near += pw;
  }
  EXPECT_GT(near / total, 0.999);
  // Integrated power equals the sine's mean square.
  EXPECT_NEAR(total * (fs / 512.0), 0.5, 0.5 * 0.01);
}

TEST(EstimatePsd, ZeroTrace) {
  const std::vector<double> x(4096, 0.0);
  const PsdEstimate p = estimate_psd(x, 1e3, 256);
  for (double d : p.densities) EXPECT_EQ(d, 0.0);
}

TEST(EstimatePsd, BadSegmentsThrow) {
  const std::vector<double> x(100, 1.0);
  EXPECT_THROW(estimate_psd(x, 1e3, 101), SegmentError);
  EXPECT_THROW(estimate_psd(x, 1e3, 1), SegmentError);
  EXPECT_THROW(estimate_psd(x, 1e3, 50, 1.0), SegmentError);
  EXPECT_THROW(estimate_psd(x, 1e3, 50, -0.1), SegmentError);
}

TEST(EstimatePsd, ParsevalOnSimulatedTrace) {
  ChainConfig c = calibrated_chain();
  c.lowpass_bandwidth = 1e4;
  const SimRun run = simulate(c, options(1.0, 3));
  const PsdEstimate p = estimate_psd(run, 8192, 0.5);
  ASSERT_GE(p.segment_count, 64u);
  double mean = 0.0, var = 0.0;
  for (double v : run.trace) mean += v;
  mean /= static_cast<double>(run.trace.size());
  for (double v : run.trace) var += (v - mean) * (v - mean);
  var /= static_cast<double>(run.trace.size());
  double integral = 0.0;
  const double df = p.frequencies[1];
  for (double d : p.densities) integral += d * d * df;
  EXPECT_NEAR(integral, var, 0.05 * var);
}

TEST(Verify, VoltageNoiseOnly) {
  ChainConfig c = calibrated_chain();
  SimOptions o = options(2.0, 11);
  o.sources = SourceMask::none();
  o.sources.opamp_voltage = true;
  const VerifyReport r = verify_against_analytic(c, o);
  ASSERT_EQ(r.sources.size(), 1u);
  EXPECT_EQ(r.sources[0].source, "opamp_voltage");
  EXPECT_GE(r.segment_count, 64u);
  EXPECT_LT(r.sources[0].rel_error, 0.1);
  EXPECT_LT(r.total.rel_error, 0.1);
}

TEST(Verify, AllSourcesAndPowerAdditivity) {
  const VerifyReport r = verify_against_analytic(calibrated_chain(), options(2.0, 12));
  EXPECT_EQ(r.sources.size(), 3u);  // no kT/C for a continuous-time charge amp
  double rss = 0.0;
  for (const auto& s : r.sources) {
    EXPECT_LT(s.rel_error, 0.1) << s.source;
    rss += s.estimated * s.estimated;
  }
  EXPECT_LT(r.total.rel_error, 0.1);
  EXPECT_NEAR(r.total.estimated, std::sqrt(rss), 0.1 * std::sqrt(rss));
}

TEST(Verify, NoSourcesIsExactlyZero) {
  ChainConfig c = calibrated_chain();
  c.amp = OpAmpModel{0.0, 0.0, 1e5};
  SimOptions o = options(0.05);
  o.t_abs = 0.0;
  const VerifyReport r = verify_against_analytic(c, o);
  EXPECT_TRUE(r.sources.empty());
  EXPECT_EQ(r.total.analytic, 0.0);
  EXPECT_EQ(r.total.estimated, 0.0);
  EXPECT_EQ(r.total.rel_error, 0.0);
}

TEST(Verify, SwitchedCapIncludesKtc) {
  ChainConfig c = calibrated_chain();
  c.topology = SwitchedCapAmp{fixed(0.5e-12), 4.0 * c.resonator.carrier_hz(), fixed(10e6)};
  const VerifyReport r = verify_against_analytic(c, options(2.0, 13));
  const auto it = std::find_if(r.sources.begin(), r.sources.end(),
                               [](const SourceCheck& s) { return s.source == "ktc"; });
  ASSERT_NE(it, r.sources.end());
  EXPECT_LT(it->rel_error, 0.1);
}
