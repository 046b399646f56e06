#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "gyro_afe/analysis.hpp"
#include "gyro_afe/config.hpp"
#include "gyro_afe/csv.hpp"
#include "gyro_afe/montecarlo.hpp"

namespace gyro_afe::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2 };

struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read config " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path output_dir(const Invocation& inv, const RunConfig& cfg) {
  if (!inv.out_dir.empty()) return inv.out_dir;
  if (const char* env = std::getenv("GYRO_AFE_OUT"); env && *env) return env;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return ".";
}

inline void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
}

inline int analyze(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const ChainConfig chain = cfg.active_chain();
  const Budget b = noise_budget(chain, cfg.noise_bandwidth, cfg.temperature_c, cfg.t_abs);
  csv::write_budget(dir / "budget.csv", b);
  log << "topology " << kind_name(chain.topology) << ": output noise "
      << b.breakdown.total_rss << " V/sqrt(Hz), rms " << b.rms_noise << " V in "
      << b.bandwidth << " Hz, snr ";
  if (b.snr_unbounded)
    log << "unbounded";
  else
    log << b.snr;
  log << ", resolution " << b.rate_resolution << " (rad/s)/sqrt(Hz)\n";
  return kOk;
}

inline int sweep(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const ChainConfig chain = cfg.active_chain();
  const SweepSeries s =
      thermal_sweep(chain, cfg.sweep.t_min, cfg.sweep.t_max, cfg.sweep.step, cfg.sweep.rate);
  csv::write_sweep(dir / "sweep.csv", s);
  log << "gain drift " << s.total_drift_ppm << " ppm (" << s.drift_slope
      << " ppm/C), output drift " << s.total_drift_v << " V\n";
  return kOk;
}

inline int compare(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  CompareOptions opt;
  opt.t_abs = cfg.t_abs;
  opt.t_min = cfg.sweep.t_min;
  opt.t_max = cfg.sweep.t_max;
  const auto rows = compare_topologies(cfg.resonator, cfg.amp, cfg.compare_set(), opt);
  csv::write_compare(dir / "compare.csv", rows);
  for (const auto& r : rows)
    log << r.topology << ": " << r.noise_density << " V/sqrt(Hz), " << r.drift_ppm << " ppm\n";
  return kOk;
}

inline int simulate_cmd(const RunConfig& cfg, std::optional<std::uint64_t> seed,
                        const std::filesystem::path& dir, std::ostream& log) {
  const ChainConfig chain = cfg.active_chain();
  SimOptions opt;
  opt.seed = seed.value_or(cfg.sim.seed);
  opt.fs = cfg.sim_fs();
  opt.duration = cfg.sim.duration;
  opt.rate = cfg.sim.rate;
  opt.temp_c = cfg.temperature_c;
  opt.t_abs = cfg.t_abs;
  const SimRun run = simulate(chain, opt);
  const std::size_t len = cfg.sim.segment_len > 0
                              ? cfg.sim.segment_len
                              : detail::verify_segment_len(run.trace.size(), 64);
  const PsdEstimate psd = estimate_psd(run, len, 0.5);
  csv::write_trace(dir / "trace.csv", run);
  csv::write_psd(dir / "psd.csv", psd);
  log << run.trace.size() << " samples, " << psd.segment_count << " PSD segments of " << len
      << "\n";
  return kOk;
}

/// Entry point shared by the gyro-afe binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Vibrating gyro analog front-end noise and drift analyzer", "gyro-afe"};
  app.require_subcommand(1);

  Invocation inv;
  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "noise budget of the selected topology -> budget.csv"},
      {"sweep", "temperature sweep -> sweep.csv"},
      {"compare", "five-topology comparison -> compare.csv"},
      {"simulate", "time-domain simulation -> trace.csv, psd.csv"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "config file")->required();
    sub->add_option("--out", inv.out_dir, "output directory (default: $GYRO_AFE_OUT)");
    sub->add_option("--seed", inv.seed, "RNG seed for simulate");
    sub->callback([&inv, n = std::string(name)] { inv.command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    const RunConfig cfg = parse_config(read_file(inv.config_path));
    const std::filesystem::path dir = output_dir(inv, cfg);
    prepare_dir(dir);
    if (inv.command == "analyze") return analyze(cfg, dir, out);
    if (inv.command == "sweep") return sweep(cfg, dir, out);
    if (inv.command == "compare") return compare(cfg, dir, out);
    return simulate_cmd(cfg, inv.seed, dir, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace gyro_afe::cli
