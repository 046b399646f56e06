#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gyro_afe/config.hpp"

using namespace gyro_afe;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_text() { return slurp(GYRO_AFE_CONFIG_DIR "/vig_default.cfg"); }

const char* kMinimal = R"(
[resonator]
c0 = 1e-12
ro = 1.5e6
omega_x = 2e5
[opamp]
en = 5e-9
in = 0
)";

void expect_validation_error(const std::string& text, const std::string& field_part) {
  try {
    parse_config(text);
    FAIL() << "expected ValidationError for " << field_part;
  } catch (const ValidationError& e) {
    EXPECT_NE(e.field().find(field_part), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(ParseConfig, ShippedDefault) {
  const RunConfig cfg = parse_config(default_text());
  EXPECT_EQ(cfg.resonator.c0, 1e-12);
  EXPECT_EQ(cfg.resonator.ro, 1.5e6);
  EXPECT_EQ(cfg.resonator.omega_x, 2e5);
  EXPECT_EQ(cfg.amp.en, 5e-9);

  const ChainConfig chain = cfg.active_chain();
  const auto* charge = std::get_if<ChargeAmp>(&chain.topology);
  ASSERT_NE(charge, nullptr);
  EXPECT_GE(charge->c_fb.nominal, 10e-12);
  EXPECT_LE(charge->c_fb.nominal, 50e-12);
  EXPECT_EQ(charge->r_fb.nominal, 10e6);
  EXPECT_EQ(cfg.compare_set().size(), 5u);

  // Couplings default to 10x / 5x the full-scale Coriolis charge.
  const double fs_charge = cfg.resonator.rate_sensitivity * cfg.resonator.full_scale_rate;
  EXPECT_DOUBLE_EQ(cfg.resonator.coupling_cap, 10.0 * fs_charge);
  EXPECT_DOUBLE_EQ(cfg.resonator.coupling_mech, 5.0 * fs_charge);
}

TEST(ParseConfig, DefaultsForOmittedFields) {
  const RunConfig cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.resonator.t_ref, 25.0);
  EXPECT_EQ(cfg.t_abs, 300.0);
  EXPECT_EQ(cfg.demod_phase_error, 0.0);
  EXPECT_EQ(cfg.amp.open_loop_gain, 1e5);
}

TEST(ParseConfig, EmptyTopologySection) {
  expect_validation_error(std::string(kMinimal) + "[topology.main]\n", "topology");
}

TEST(ParseConfig, TopologyRequired) {
  const RunConfig cfg = parse_config(kMinimal);
  try {
    cfg.active_chain();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "analysis.topology");
  }
}

TEST(ParseConfig, DuplicateMatchedMember) {
  const std::string text = std::string(kMinimal) +
                           "[component.CA]\nnominal = 1e-12\nmatched_group = pair\n"
                           "[component.CA]\nnominal = 1e-12\nmatched_group = pair\n";
  expect_validation_error(text, "component.CA");
}

TEST(ParseConfig, MatchedGroupMustResolve) {
  const std::string text = std::string(kMinimal) +
                           "[component.R]\nnominal = 1e7\n"
                           "[topology.d]\nkind = diffcharge\nc_fb_pair = nope\nr_fb = R\n";
  expect_validation_error(text, "topology.d.c_fb_pair");
}

TEST(ParseConfig, MatchedGroupSharesTempco) {
  const std::string text = std::string(kMinimal) +
                           "[component.CA]\nnominal = 1e-12\ntempco_ppm_per_C = 30\nmatched_group = p\n"
                           "[component.CB]\nnominal = 1e-12\ntempco_ppm_per_C = 31\nmatched_group = p\n";
  expect_validation_error(text, "matched_group");
}

TEST(ParseConfig, InvariantViolations) {
  std::string text = kMinimal;
  text.replace(text.find("c0 = 1e-12"), 10, "c0 = 0");
  expect_validation_error(text, "resonator.c0");
  expect_validation_error(std::string(kMinimal) + "[component.R]\nnominal = 1e7\n"
                                                  "[topology.c]\nkind = charge\nc_fb = X\nr_fb = R\n",
                          "topology.c.c_fb");
  expect_validation_error(std::string(kMinimal) + "[sweep]\nt_min = 10\nt_max = 0\n", "sweep");
}

TEST(ParseConfig, SyntaxErrorsCarryLineAndField) {
  try {
    parse_config(std::string(kMinimal) + "[chain]\nlowpass_bandwidth = 1k\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "chain.lowpass_bandwidth");
    EXPECT_EQ(e.line(), 10);
  }
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[chain]\nbogus = 1\n"), ParseError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[nowhere]\n"), ParseError);
  EXPECT_THROW(parse_config("c0 = 1\n"), ParseError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[chain\n"), ParseError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[topology.x]\nkind = magic\n"), ParseError);
}

TEST(ParseConfig, ScientificNotation) {
  const RunConfig cfg = parse_config(R"([resonator]
c0 = 1.0E-12
ro = +1.5e+06
omega_x = 200000
[opamp]
en = 5e-9
in = 0
)");
  EXPECT_EQ(cfg.resonator.c0, 1e-12);
  EXPECT_EQ(cfg.resonator.ro, 1.5e6);
}

TEST(SerializeConfig, RoundTripDefault) {
  const RunConfig a = parse_config(default_text());
  const RunConfig b = parse_config(serialize_config(a));
  EXPECT_EQ(a, b);
}

TEST(SerializeConfig, RoundTripRandomized) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RunConfig base = parse_config(default_text());
  for (int i = 0; i < 50; ++i) {
    RunConfig c = base;
    c.resonator.c0 = 1e-12 * (0.1 + u(rng));
    c.resonator.ro = 1e6 * (0.1 + u(rng));
    c.resonator.freq_tempco = 100.0 * (u(rng) - 0.5);
    c.resonator.coupling_mech = 1e-15 * u(rng);
    c.amp.en = 1e-8 * u(rng);
    for (auto& comp : c.components) {
      comp.value.nominal *= 0.5 + u(rng);
      if (comp.matched_group.empty()) comp.value.tempco_ppm = 300.0 * (u(rng) - 0.5);
    }
    c.demod_phase_error = 0.5 * (u(rng) - 0.5);
    c.sim.seed = rng();
    c.sim.duration = 0.1 + u(rng);
    c.sweep.step = 1.0 + 10.0 * u(rng);
    const RunConfig back = parse_config(serialize_config(c));
    EXPECT_EQ(back, c) << serialize_config(c);
  }
}
