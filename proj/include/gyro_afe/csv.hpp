#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "gyro_afe/analysis.hpp"
#include "gyro_afe/errors.hpp"
#include "gyro_afe/montecarlo.hpp"

namespace gyro_afe::csv {

// Shortest round-trip representation; locale independent.
inline std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline void write(const std::filesystem::path& path, std::string_view header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_budget(const std::filesystem::path& path, const Budget& b) {
  auto row = [](const char* name, double in, double out) {
    return std::vector<std::string>{name, num(in), num(out)};
  };
  write(path, "source,input_C_per_sqrtHz,output_V_per_sqrtHz",
        {
            row("johnson", b.input.johnson, b.breakdown.johnson),
            row("opamp_current", b.input.opamp_current, b.breakdown.opamp_current),
            row("opamp_voltage", b.input.opamp_voltage, b.breakdown.opamp_voltage),
            row("ktc", b.input.ktc, b.breakdown.ktc),
            row("total", b.input.total_rss, b.breakdown.total_rss),
        });
}

inline void write_sweep(const std::filesystem::path& path, const SweepSeries& s) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < s.temperatures.size(); ++i)
    rows.push_back({num(s.temperatures[i]), num(s.gains[i]), num(s.outputs[i]),
                    num(s.drift_ppm[i])});
  write(path, "T_C,gain_V_per_C,output_V,drift_ppm", rows);
}

inline void write_compare(const std::filesystem::path& path,
                          const std::vector<ComparisonRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows)
    out.push_back({r.topology, num(r.noise_density), num(r.drift_ppm),
                   r.integrable ? "yes" : "no", r.simplicity ? "yes" : "no"});
  write(path, "topology,noise_V_per_sqrtHz,drift_ppm,integrable,simplicity", out);
}

inline void write_psd(const std::filesystem::path& path, const PsdEstimate& p) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(p.frequencies.size());
  for (std::size_t k = 0; k < p.frequencies.size(); ++k)
    rows.push_back({num(p.frequencies[k]), num(p.densities[k])});
  write(path, "freq_Hz,psd_V_per_sqrtHz", rows);
}

inline void write_trace(const std::filesystem::path& path, const SimRun& run) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(run.trace.size());
  for (std::size_t n = 0; n < run.trace.size(); ++n)
    rows.push_back({num(static_cast<double>(n) / run.fs), num(run.trace[n])});
  write(path, "t_s,v_V", rows);
}

}  // namespace gyro_afe::csv
