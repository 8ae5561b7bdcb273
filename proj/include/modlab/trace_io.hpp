#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modlab/config.hpp"
#include "modlab/correlator.hpp"
#include "modlab/error.hpp"
#include "modlab/fit.hpp"

namespace modlab {

inline constexpr std::string_view kToolVersion = "modlab 0.1.0";
inline constexpr std::string_view kTraceHeader = "delta_ghz,paired,accidental,total,n_index";

namespace detail {

inline std::string format_sig(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, r.ptr);
}

}  // namespace detail

// FNV-1a 64 over the canonical serialization, as 16 hex digits.
inline std::string scenario_hash(const ScenarioParams& p) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize_scenario(p)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i, h >>= 4) buf[i] = kHex[h & 0xf];
  buf[16] = '\0';
  return buf;
}

struct TraceMetadata {
  std::string command;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string tool_version{kToolVersion};
  std::string rng_algorithm{kRngAlgorithm};
  std::string model;  // "trace" or "full"

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["scenario_hash"] = scenario_hash;
    j["seed"] = seed;
    j["rng_algorithm"] = rng_algorithm;
    j["model"] = model;
    j["frequency_axis"] = "delta_ghz is Delta = beta (x1 + x2) - w_p in GHz; the measured figures span +-150 GHz";
    return j;
  }
};

// CSV (header + one row per sample, LF endings), or with gnuplot_style a
// whitespace-separated table with a '#' header line.
inline void write_trace(std::ostream& out, const CorrelationTrace& t, bool gnuplot_style = false) {
  const char sep = gnuplot_style ? ' ' : ',';
  if (gnuplot_style) out << "# delta_ghz paired accidental total n_index\n";
  else out << kTraceHeader << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << detail::format_sig(t.delta[i]) << sep << detail::format_sig(t.paired[i]) << sep
        << detail::format_sig(t.accidental[i]) << sep << detail::format_sig(t.total[i]) << sep << t.n_index[i]
        << '\n';
  }
}

inline std::filesystem::path metadata_path(const std::filesystem::path& p) {
  std::filesystem::path m = p;
  m += ".meta.json";
  return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

// Writes the trace and a sibling <path>.meta.json.
inline void emit_trace(const CorrelationTrace& t, const std::filesystem::path& path, const TraceMetadata& meta,
                       bool gnuplot_style = false) {
  std::ostringstream body;
  write_trace(body, t, gnuplot_style);
  write_text_file(path, body.str());
  write_text_file(metadata_path(path), meta.to_json().dump(2) + "\n");
}

inline void write_counts(std::ostream& out, const CountData& d) {
  out << "delta_ghz,counts\n";
  for (std::size_t i = 0; i < d.delta.size(); ++i)
    out << detail::format_sig(d.delta[i]) << ',' << detail::format_sig(d.counts[i]) << '\n';
}

// Reads a `delta_ghz,counts` CSV as written by write_counts.
inline CountData read_counts(std::istream& in, double dwell_s) {
  CountData d;
  d.dwell_s = dwell_s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("delta_ghz", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(lineno, "expected delta_ghz,counts");
    double a = 0.0, b = 0.0;
    const char* s = line.data();
    const auto r1 = std::from_chars(s, s + comma, a);
    const auto r2 = std::from_chars(s + comma + 1, s + line.size(), b);
    if (r1.ec != std::errc{} || r1.ptr != s + comma || r2.ec != std::errc{} || r2.ptr != s + line.size())
      throw ParseError(lineno, "malformed number in counts file");
    d.delta.push_back(a);
    d.counts.push_back(b);
  }
  return d;
}

inline CountData load_counts(const std::filesystem::path& path, double dwell_s) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path.string());
  return read_counts(in, dwell_s);
}

inline nlohmann::ordered_json to_json(const FitResult& f) {
  nlohmann::ordered_json j;
  j["alpha1_sq"] = f.alpha1_sq;
  j["alpha2_sq"] = f.alpha2_sq;
  j["delta_offset_ghz"] = f.delta_offset;
  j["residual_rms"] = f.residual_rms;
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["note"] = "alpha^2 are effective scales with the channel-2 singles rate held at its measured value";
  return j;
}

}  // namespace modlab
