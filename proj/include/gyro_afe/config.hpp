#pragma once

// Run configuration: flat sectioned key = value text.
//
//   # comment
//   [resonator]
//   c0 = 1e-12
//   [component.RFB]
//   nominal = 10e6
//   tempco_ppm_per_C = 30
//
// Units are fixed per key (ohm, farad, rad/s, ppm/°C, Hz, s); see
// configs/vig_default.cfg for the full key list.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gyro_afe/chain.hpp"
#include "gyro_afe/components.hpp"
#include "gyro_afe/errors.hpp"
#include "gyro_afe/preamp.hpp"
#include "gyro_afe/signal_model.hpp"

namespace gyro_afe {

struct ComponentSpec {
  std::string name;
  TempcoValue value;
  std::string matched_group;  // empty when unmatched

  bool operator==(const ComponentSpec&) const = default;
};

/// A topology declared by component references.
struct TopologySpec {
  std::string name;
  TopologyKind kind = TopologyKind::Charge;
  std::string r_fb;       // current, charge, diffcharge, sc
  std::string c_fb;       // charge, sc
  std::string r;          // voltage
  std::string c_p;        // voltage
  std::string c_fb_pair;  // diffcharge: matched group label
  double gain = 0.0;      // voltage
  double f_s = 0.0;       // sc, Hz

  bool operator==(const TopologySpec&) const = default;
};

struct SweepSettings {
  double t_min = -40.0;
  double t_max = 80.0;
  double step = 10.0;
  double rate = 0.0;
  bool operator==(const SweepSettings&) const = default;
};

struct SimSettings {
  std::uint64_t seed = 1;
  double fs = 0.0;  // 0 selects 20x the carrier
  double duration = 1.0;
  double rate = 0.0;
  std::size_t segment_len = 0;  // 0 selects automatically
  bool operator==(const SimSettings&) const = default;
};

struct RunConfig {
  ResonatorParams resonator;
  OpAmpModel amp;
  std::vector<ComponentSpec> components;
  std::vector<TopologySpec> topologies;
  std::string active;                // [analysis] topology
  std::vector<std::string> compare;  // [compare] topologies
  double temperature_c = 25.0;
  double t_abs = kDefaultTabs;
  double noise_bandwidth = 1.0;  // Hz
  double demod_phase_error = 0.0;
  double lowpass_bandwidth = 1e3;
  SweepSettings sweep;
  SimSettings sim;
  std::string output_dir;

  bool operator==(const RunConfig&) const = default;

  const ComponentSpec* find_component(std::string_view name) const {
    for (const auto& c : components)
      if (c.name == name) return &c;
    return nullptr;
  }

  const TopologySpec* find_topology(std::string_view name) const {
    for (const auto& t : topologies)
      if (t.name == name) return &t;
    return nullptr;
  }

  MatchedGroup matched_group(const std::string& label) const {
    MatchedGroup g;
    g.label = label;
    for (const auto& c : components) {
      if (c.matched_group != label) continue;
      if (g.nominals.empty()) {
        g.tempco_ppm = c.value.tempco_ppm;
        g.t_ref = c.value.t_ref;
      }
      g.nominals.push_back(c.value.nominal);
    }
    return g;
  }

  Topology resolve(const TopologySpec& spec) const {
    auto comp = [&](const std::string& ref) { return find_component(ref)->value; };
    switch (spec.kind) {
      case TopologyKind::Current: return CurrentAmp{comp(spec.r_fb)};
      case TopologyKind::Charge: return ChargeAmp{comp(spec.c_fb), comp(spec.r_fb)};
      case TopologyKind::Voltage: return VoltageAmp{comp(spec.r), comp(spec.c_p), spec.gain};
      case TopologyKind::DiffCharge:
        return DiffChargeAmp{matched_group(spec.c_fb_pair), comp(spec.r_fb)};
      case TopologyKind::SwitchedCap:
        return SwitchedCapAmp{comp(spec.c_fb), spec.f_s, comp(spec.r_fb)};
    }
    throw ValidationError("topology." + spec.name, "unknown kind");
  }

  ChainConfig chain(const TopologySpec& spec) const {
    ChainConfig c;
    c.resonator = resonator;
    c.topology = resolve(spec);
    c.amp = amp;
    c.demod_phase_error = demod_phase_error;
    c.lowpass_bandwidth = lowpass_bandwidth;
    return c;
  }

  /// Chain of the [analysis] topology.
  ChainConfig active_chain() const {
    const TopologySpec* t = find_topology(active);
    if (active.empty() || !t)
      throw ValidationError("analysis.topology", "exactly one topology must be selected");
    return chain(*t);
  }

  std::vector<Topology> compare_set() const {
    std::vector<Topology> out;
    std::set<TopologyKind> kinds;
    for (const auto& name : compare) {
      const TopologySpec* t = find_topology(name);
      if (!t) throw ValidationError("compare.topologies", "unknown topology '" + name + "'");
      kinds.insert(t->kind);
      out.push_back(resolve(*t));
    }
    if (out.size() != 5 || kinds.size() != 5)
      throw ValidationError("compare.topologies", "must list all five topology kinds once");
    return out;
  }

  double sim_fs() const { return sim.fs > 0.0 ? sim.fs : 20.0 * resonator.carrier_hz(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::optional<TopologyKind> parse_kind(std::string_view s) {
  for (auto k : {TopologyKind::Current, TopologyKind::Charge, TopologyKind::Voltage,
                 TopologyKind::DiffCharge, TopologyKind::SwitchedCap})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> keys;
};

class Reader {
 public:
  explicit Reader(Section& s) : s_(s) {}

  std::string path(const std::string& key) const { return s_.name + "." + key; }

  bool has(const std::string& key) const { return s_.keys.count(key) != 0; }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    auto it = s_.keys.find(key);
    if (it == s_.keys.end()) {
      if (fallback) return *fallback;
      throw ValidationError(path(key), "required field missing");
    }
    used_.insert(key);
    const std::string& text = it->second.value;
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || !std::isfinite(v))
      throw ParseError(path(key), it->second.line, "'" + text + "' is not a number");
    return v;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    auto it = s_.keys.find(key);
    if (it == s_.keys.end()) return fallback;
    used_.insert(key);
    const std::string& text = it->second.value;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      throw ParseError(path(key), it->second.line, "'" + text + "' is not an unsigned integer");
    return v;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    auto it = s_.keys.find(key);
    if (it == s_.keys.end()) {
      if (fallback) return *fallback;
      throw ValidationError(path(key), "required field missing");
    }
    used_.insert(key);
    return it->second.value;
  }

  int line(const std::string& key) const {
    auto it = s_.keys.find(key);
    return it == s_.keys.end() ? s_.line : it->second.line;
  }

  void reject_unknown() const {
    for (const auto& [k, e] : s_.keys)
      if (!used_.count(k)) throw ParseError(path(k), e.line, "unknown key");
  }

 private:
  Section& s_;
  std::set<std::string> used_;
};

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

}  // namespace detail

/// Parses and validates a run configuration.
///
/// Throws ParseError for malformed text (with line and field path) and
/// ValidationError when values break an invariant.
inline RunConfig parse_config(std::string_view text) {
  using detail::Reader;
  std::vector<detail::Section> sections;
  std::set<std::string> seen;

  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("", line_no, "unterminated section header");
      std::string name(detail::trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ParseError("", line_no, "empty section name");
      if (!seen.insert(name).second) {
        if (name.rfind("component.", 0) == 0)
          throw ValidationError(name, "duplicate component name");
        throw ParseError(name, line_no, "duplicate section");
      }
      sections.push_back({name, line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("", line_no, "expected key = value");
    if (sections.empty()) throw ParseError("", line_no, "key outside of any section");
    std::string key(detail::trim(line.substr(0, eq)));
    std::string value(detail::trim(line.substr(eq + 1)));
    auto& sec = sections.back();
    if (key.empty()) throw ParseError(sec.name, line_no, "empty key");
    if (!sec.keys.emplace(key, detail::Entry{value, line_no}).second)
      throw ParseError(sec.name + "." + key, line_no, "duplicate key");
  }

  RunConfig cfg;
  bool have_resonator = false, have_opamp = false;
  std::optional<double> coupling_cap, coupling_mech;

  for (auto& sec : sections) {
    Reader r(sec);
    const std::string& name = sec.name;

    if (name == "resonator") {
      have_resonator = true;
      auto& p = cfg.resonator;
      p.c0 = r.number("c0");
      p.ro = r.number("ro");
      p.omega_x = r.number("omega_x");
      p.rate_sensitivity = r.number("rate_sensitivity", 1e-16);
      p.freq_tempco = r.number("freq_tempco_ppm_per_C", 0.0);
      p.full_scale_rate = r.number("full_scale_rate", ResonatorParams{}.full_scale_rate);
      p.t_ref = r.number("t_ref", 25.0);
      if (r.has("coupling_cap")) coupling_cap = r.number("coupling_cap");
      if (r.has("coupling_mech")) coupling_mech = r.number("coupling_mech");
    } else if (name == "opamp") {
      have_opamp = true;
      cfg.amp.en = r.number("en");
      cfg.amp.in = r.number("in");
      cfg.amp.open_loop_gain = r.number("open_loop_gain", 1e5);
    } else if (name.rfind("component.", 0) == 0) {
      ComponentSpec c;
      c.name = name.substr(10);
      c.value.nominal = r.number("nominal");
      c.value.tempco_ppm = r.number("tempco_ppm_per_C", 0.0);
      c.value.t_ref = r.number("t_ref", 25.0);
      c.matched_group = r.text("matched_group", "");
      cfg.components.push_back(std::move(c));
    } else if (name.rfind("topology.", 0) == 0) {
      TopologySpec t;
      t.name = name.substr(9);
      if (sec.keys.empty()) throw ValidationError(name, "topology section is empty");
      const std::string kind = r.text("kind");
      const auto k = detail::parse_kind(kind);
      if (!k)
        throw ParseError(r.path("kind"), r.line("kind"),
                         "unknown topology kind '" + kind +
                             "' (expected current, charge, voltage, diffcharge or sc)");
      t.kind = *k;
      switch (t.kind) {
        case TopologyKind::Current: t.r_fb = r.text("r_fb"); break;
        case TopologyKind::Charge:
          t.c_fb = r.text("c_fb");
          t.r_fb = r.text("r_fb");
          break;
        case TopologyKind::Voltage:
          t.r = r.text("r");
          t.c_p = r.text("c_p");
          t.gain = r.number("gain");
          break;
        case TopologyKind::DiffCharge:
          t.c_fb_pair = r.text("c_fb_pair");
          t.r_fb = r.text("r_fb");
          break;
        case TopologyKind::SwitchedCap:
          t.c_fb = r.text("c_fb");
          t.f_s = r.number("f_s");
          t.r_fb = r.text("r_fb");
          break;
      }
      cfg.topologies.push_back(std::move(t));
    } else if (name == "analysis") {
      cfg.active = r.text("topology", "");
      cfg.temperature_c = r.number("temperature_C", 25.0);
      cfg.t_abs = r.number("T_abs", kDefaultTabs);
      cfg.noise_bandwidth = r.number("noise_bandwidth", 1.0);
    } else if (name == "compare") {
      cfg.compare = detail::split_list(r.text("topologies"));
    } else if (name == "chain") {
      cfg.demod_phase_error = r.number("demod_phase_error", 0.0);
      cfg.lowpass_bandwidth = r.number("lowpass_bandwidth", 1e3);
    } else if (name == "sweep") {
      cfg.sweep.t_min = r.number("t_min", -40.0);
      cfg.sweep.t_max = r.number("t_max", 80.0);
      cfg.sweep.step = r.number("step", 10.0);
      cfg.sweep.rate = r.number("rate", 0.0);
    } else if (name == "sim") {
      cfg.sim.seed = r.integer("seed", 1);
      cfg.sim.fs = r.number("fs", 0.0);
      cfg.sim.duration = r.number("duration", 1.0);
      cfg.sim.rate = r.number("rate", 0.0);
      cfg.sim.segment_len = static_cast<std::size_t>(r.integer("segment_len", 0));
    } else if (name == "output") {
      cfg.output_dir = r.text("dir", "");
    } else {
      throw ParseError(name, sec.line, "unknown section");
    }
    r.reject_unknown();
  }

  using detail::require;
  require(have_resonator, "resonator", "section missing");
  require(have_opamp, "opamp", "section missing");

  auto& res = cfg.resonator;
  require(res.c0 > 0.0, "resonator.c0", "must be > 0");
  require(res.ro > 0.0, "resonator.ro", "must be > 0");
  require(res.omega_x > 0.0, "resonator.omega_x", "must be > 0");
  require(res.rate_sensitivity >= 0.0, "resonator.rate_sensitivity", "must be >= 0");
  require(res.full_scale_rate > 0.0, "resonator.full_scale_rate", "must be > 0");
  const ResonatorParams coupled = with_default_couplings(res);
  res.coupling_cap = coupling_cap.value_or(coupled.coupling_cap);
  res.coupling_mech = coupling_mech.value_or(coupled.coupling_mech);
  require(res.coupling_cap >= 0.0, "resonator.coupling_cap", "must be >= 0");
  require(res.coupling_mech >= 0.0, "resonator.coupling_mech", "must be >= 0");

  require(cfg.amp.en >= 0.0, "opamp.en", "must be >= 0");
  require(cfg.amp.in >= 0.0, "opamp.in", "must be >= 0");
  require(cfg.amp.open_loop_gain > 1.0, "opamp.open_loop_gain", "must be > 1");

  std::map<std::string, std::vector<const ComponentSpec*>> groups;
  for (const auto& c : cfg.components) {
    const std::string f = "component." + c.name;
    require(!c.name.empty(), f, "empty component name");
    require(c.value.nominal >= 0.0, f + ".nominal", "must be >= 0");
    if (!c.matched_group.empty()) groups[c.matched_group].push_back(&c);
  }
  for (const auto& [label, members] : groups) {
    for (const auto* m : members) {
      require(m->value.tempco_ppm == members.front()->value.tempco_ppm &&
                  m->value.t_ref == members.front()->value.t_ref,
              "component." + m->name + ".matched_group",
              "members of matched group '" + label + "' must share tempco and t_ref");
    }
  }

  std::set<std::string> topo_names;
  for (const auto& t : cfg.topologies) {
    const std::string f = "topology." + t.name;
    auto ref = [&](const std::string& key, const std::string& comp, bool allow_zero) {
      const ComponentSpec* c = cfg.find_component(comp);
      require(c != nullptr, f + "." + key, "unknown component '" + comp + "'");
      require(allow_zero ? c->value.nominal >= 0.0 : c->value.nominal > 0.0, f + "." + key,
              "component '" + comp + "' must have a positive value");
    };
    switch (t.kind) {
      case TopologyKind::Current: ref("r_fb", t.r_fb, false); break;
      case TopologyKind::Charge:
        ref("c_fb", t.c_fb, false);
        ref("r_fb", t.r_fb, false);
        break;
      case TopologyKind::Voltage:
        ref("r", t.r, false);
        ref("c_p", t.c_p, true);
        require(t.gain > 1.0, f + ".gain", "must be > 1");
        break;
      case TopologyKind::DiffCharge: {
        ref("r_fb", t.r_fb, false);
        const auto it = groups.find(t.c_fb_pair);
        require(it != groups.end(), f + ".c_fb_pair",
                "matched group '" + t.c_fb_pair + "' does not resolve");
        require(it->second.size() == 2, f + ".c_fb_pair",
                "matched group '" + t.c_fb_pair + "' must have exactly two members");
        for (const auto* m : it->second)
          require(m->value.nominal > 0.0, f + ".c_fb_pair", "capacitances must be > 0");
        break;
      }
      case TopologyKind::SwitchedCap:
        ref("c_fb", t.c_fb, false);
        ref("r_fb", t.r_fb, false);
        require(t.f_s > 0.0, f + ".f_s", "must be > 0");
        break;
    }
  }

  if (!cfg.active.empty())
    require(cfg.find_topology(cfg.active) != nullptr, "analysis.topology",
            "unknown topology '" + cfg.active + "'");
  for (const auto& n : cfg.compare)
    require(cfg.find_topology(n) != nullptr, "compare.topologies",
            "unknown topology '" + n + "'");

  require(cfg.t_abs >= 0.0, "analysis.T_abs", "must be >= 0");
  require(cfg.noise_bandwidth > 0.0, "analysis.noise_bandwidth", "must be > 0");
  require(cfg.lowpass_bandwidth > 0.0, "chain.lowpass_bandwidth", "must be > 0");
  require(std::abs(cfg.demod_phase_error) < 3.141592653589793, "chain.demod_phase_error",
          "must be within (-pi, pi)");
  require(cfg.sweep.t_min < cfg.sweep.t_max, "sweep.t_max", "must exceed t_min");
  require(cfg.sweep.step > 0.0, "sweep.step", "must be > 0");
  require(cfg.sim.fs >= 0.0, "sim.fs", "must be >= 0");
  require(cfg.sim.duration > 0.0, "sim.duration", "must be > 0");
  return cfg;
}

/// Writes a configuration that parse_config reads back to an equal value.
inline std::string serialize_config(const RunConfig& cfg) {
  using detail::format_double;
  std::ostringstream o;
  const auto& p = cfg.resonator;
  o << "[resonator]\n"
    << "c0 = " << format_double(p.c0) << "\n"
    << "ro = " << format_double(p.ro) << "\n"
    << "omega_x = " << format_double(p.omega_x) << "\n"
    << "rate_sensitivity = " << format_double(p.rate_sensitivity) << "\n"
    << "coupling_cap = " << format_double(p.coupling_cap) << "\n"
    << "coupling_mech = " << format_double(p.coupling_mech) << "\n"
    << "freq_tempco_ppm_per_C = " << format_double(p.freq_tempco) << "\n"
    << "full_scale_rate = " << format_double(p.full_scale_rate) << "\n"
    << "t_ref = " << format_double(p.t_ref) << "\n\n";
  o << "[opamp]\n"
    << "en = " << format_double(cfg.amp.en) << "\n"
    << "in = " << format_double(cfg.amp.in) << "\n"
    << "open_loop_gain = " << format_double(cfg.amp.open_loop_gain) << "\n\n";
  for (const auto& c : cfg.components) {
    o << "[component." << c.name << "]\n"
      << "nominal = " << format_double(c.value.nominal) << "\n"
      << "tempco_ppm_per_C = " << format_double(c.value.tempco_ppm) << "\n"
      << "t_ref = " << format_double(c.value.t_ref) << "\n";
    if (!c.matched_group.empty()) o << "matched_group = " << c.matched_group << "\n";
    o << "\n";
  }
  for (const auto& t : cfg.topologies) {
    o << "[topology." << t.name << "]\n"
      << "kind = " << kind_name(t.kind) << "\n";
    switch (t.kind) {
      case TopologyKind::Current: o << "r_fb = " << t.r_fb << "\n"; break;
      case TopologyKind::Charge: o << "c_fb = " << t.c_fb << "\nr_fb = " << t.r_fb << "\n"; break;
      case TopologyKind::Voltage:
        o << "r = " << t.r << "\nc_p = " << t.c_p << "\ngain = " << format_double(t.gain)
          << "\n";
        break;
      case TopologyKind::DiffCharge:
        o << "c_fb_pair = " << t.c_fb_pair << "\nr_fb = " << t.r_fb << "\n";
        break;
      case TopologyKind::SwitchedCap:
        o << "c_fb = " << t.c_fb << "\nf_s = " << format_double(t.f_s) << "\nr_fb = " << t.r_fb
          << "\n";
        break;
    }
    o << "\n";
  }
  o << "[analysis]\n";
  if (!cfg.active.empty()) o << "topology = " << cfg.active << "\n";
  o << "temperature_C = " << format_double(cfg.temperature_c) << "\n"
    << "T_abs = " << format_double(cfg.t_abs) << "\n"
    << "noise_bandwidth = " << format_double(cfg.noise_bandwidth) << "\n\n";
  if (!cfg.compare.empty()) {
    o << "[compare]\ntopologies = ";
    for (std::size_t i = 0; i < cfg.compare.size(); ++i)
      o << (i ? ", " : "") << cfg.compare[i];
    o << "\n\n";
  }
  o << "[chain]\n"
    << "demod_phase_error = " << format_double(cfg.demod_phase_error) << "\n"
    << "lowpass_bandwidth = " << format_double(cfg.lowpass_bandwidth) << "\n\n";
  o << "[sweep]\n"
    << "t_min = " << format_double(cfg.sweep.t_min) << "\n"
    << "t_max = " << format_double(cfg.sweep.t_max) << "\n"
    << "step = " << format_double(cfg.sweep.step) << "\n"
    << "rate = " << format_double(cfg.sweep.rate) << "\n\n";
  o << "[sim]\n"
    << "seed = " << cfg.sim.seed << "\n"
    << "fs = " << format_double(cfg.sim.fs) << "\n"
    << "duration = " << format_double(cfg.sim.duration) << "\n"
    << "rate = " << format_double(cfg.sim.rate) << "\n"
    << "segment_len = " << cfg.sim.segment_len << "\n";
  if (!cfg.output_dir.empty()) o << "\n[output]\ndir = " << cfg.output_dir << "\n";
  return o.str();
}

}  // namespace gyro_afe
