#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modlab/error.hpp"
#include "modlab/scenario.hpp"

// Plain-text run configuration:
//
//   schema = 1                 # required
//   preset = fig4b             # optional; applied before every other key
//
//   [run]        command, output, data, case, delta_min, delta_max, delta_step, seed, dwell
//   [pump]       frequency
//   [modulation] omega_m, tail_tol
//   [modulator1] depth, phase, waveform          (likewise [modulator2])
//   [filter1]    fwhm, alpha_sq, slit            ([filter2]: fwhm, alpha_sq)
//   [instrument] gate, dispersion, fwhm_convention
//   [amplitudes] mode, b0, r2
//   [crystal]    kappa, curvature, length, span, points, steps
//
// Numbers may carry a unit suffix (`8.5 GHz`); a suffix other than the key's
// unit is an error, as is any unknown section or key.

namespace modlab {

enum class Command { scan, figure, fit, validate };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::scan: return "scan";
    case Command::figure: return "figure";
    case Command::fit: return "fit";
    case Command::validate: return "validate";
  }
  return "scan";
}

inline std::optional<Command> parse_command(std::string_view s) {
  for (Command c : {Command::scan, Command::figure, Command::fit, Command::validate})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  Command command = Command::scan;
  std::string scenario_path;
  std::string output_path;
  std::string data_path;
  double delta_min = -150.0;  // GHz
  double delta_max = 150.0;   // GHz
  double delta_step = 0.5;    // GHz
  FigureCase figure_case = FigureCase::fig3a;
  std::uint64_t seed = 1;
  double dwell_s = 20.0;
  std::optional<FigureCase> preset;

  bool operator==(const RunConfig&) const = default;
};

struct ParsedConfig {
  RunConfig run;
  ScenarioParams scenario;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Value {
  std::string_view text;
  std::size_t line;
};

inline double parse_number(const Value& v, std::string_view unit) {
  std::string_view t = v.text;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc{} || ptr == t.data()) throw ParseError(v.line, "expected a number, got '" + std::string(t) + "'");
  const std::string_view suffix = trim(t.substr(static_cast<std::size_t>(ptr - t.data())));
  if (!suffix.empty() && suffix != unit) {
    const std::string want = unit.empty() ? std::string("no unit") : "'" + std::string(unit) + "'";
    throw ParseError(v.line, "unit '" + std::string(suffix) + "' does not match expected " + want);
  }
  return x;
}

inline std::uint64_t parse_unsigned(const Value& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
  if (ec != std::errc{} || ptr != v.text.data() + v.text.size())
    throw ParseError(v.line, "expected a nonnegative integer, got '" + std::string(v.text) + "'");
  return x;
}

// Applies one key's value; numeric handlers know the unit their key expects.
struct KeySpec {
  std::function<void(const Value&, ParsedConfig&)> apply;
};

inline std::map<std::string, std::map<std::string, KeySpec>> config_schema() {
  using std::string_view;
  auto num = [](string_view unit, auto member) {
    return KeySpec{[unit, member](const Value& v, ParsedConfig& c) { member(c) = parse_number(v, unit); }};
  };
  auto str = [](auto member) {
    return KeySpec{[member](const Value& v, ParsedConfig& c) { member(c) = std::string(v.text); }};
  };
  std::map<std::string, std::map<std::string, KeySpec>> s;

  auto& run = s["run"];
  run["command"] = KeySpec{[](const Value& v, ParsedConfig& c) {
    const auto cmd = parse_command(v.text);
    if (!cmd) throw ParseError(v.line, "unknown command '" + std::string(v.text) + "'");
    c.run.command = *cmd;
  }};
  run["output"] = str([](ParsedConfig& c) -> std::string& { return c.run.output_path; });
  run["data"] = str([](ParsedConfig& c) -> std::string& { return c.run.data_path; });
  run["case"] = KeySpec{[](const Value& v, ParsedConfig& c) {
    const auto fc = parse_figure_case(v.text);
    if (!fc) throw ParseError(v.line, "unknown figure case '" + std::string(v.text) + "'");
    c.run.figure_case = *fc;
  }};
  run["delta_min"] = num("GHz", [](ParsedConfig& c) -> double& { return c.run.delta_min; });
  run["delta_max"] = num("GHz", [](ParsedConfig& c) -> double& { return c.run.delta_max; });
  run["delta_step"] = num("GHz", [](ParsedConfig& c) -> double& { return c.run.delta_step; });
  run["seed"] = KeySpec{[](const Value& v, ParsedConfig& c) { c.run.seed = parse_unsigned(v); }};
  run["dwell"] = num("s", [](ParsedConfig& c) -> double& { return c.run.dwell_s; });

  s["pump"]["frequency"] = num("GHz", [](ParsedConfig& c) -> double& { return c.scenario.pump_frequency; });
  s["modulation"]["omega_m"] = num("GHz", [](ParsedConfig& c) -> double& { return c.scenario.omega_m; });
  s["modulation"]["tail_tol"] = num("", [](ParsedConfig& c) -> double& { return c.scenario.tail_tol; });

  for (int ch : {1, 2}) {
    auto mod = [ch](ParsedConfig& c) -> ModulatorParams& { return ch == 1 ? c.scenario.mod1 : c.scenario.mod2; };
    auto& m = s["modulator" + std::to_string(ch)];
    m["depth"] = num("rad", [mod](ParsedConfig& c) -> double& { return mod(c).depth; });
    m["phase"] = num("rad", [mod](ParsedConfig& c) -> double& { return mod(c).phase; });
    m["waveform"] = str([mod](ParsedConfig& c) -> std::string& { return mod(c).waveform_path; });
  }

  s["filter1"]["fwhm"] = num("GHz", [](ParsedConfig& c) -> double& { return c.scenario.fwhm1; });
  s["filter1"]["alpha_sq"] = num("", [](ParsedConfig& c) -> double& { return c.scenario.alpha1_sq; });
  s["filter1"]["slit"] = num("mm", [](ParsedConfig& c) -> double& { return c.scenario.slit1_mm; });
  s["filter2"]["fwhm"] = num("GHz", [](ParsedConfig& c) -> double& { return c.scenario.fwhm2; });
  s["filter2"]["alpha_sq"] = num("", [](ParsedConfig& c) -> double& { return c.scenario.alpha2_sq; });

  auto& inst = s["instrument"];
  inst["gate"] = num("ns", [](ParsedConfig& c) -> double& { return c.scenario.gate_ns; });
  inst["dispersion"] = num("GHz/mm", [](ParsedConfig& c) -> double& { return c.scenario.dispersion; });
  inst["fwhm_convention"] = KeySpec{[](const Value& v, ParsedConfig& c) {
    const auto conv = parse_fwhm_convention(v.text);
    if (!conv) throw ParseError(v.line, "fwhm_convention must be 'field' or 'intensity'");
    c.scenario.convention = *conv;
  }};

  auto& amp = s["amplitudes"];
  amp["mode"] = KeySpec{[](const Value& v, ParsedConfig& c) {
    const auto mode = parse_amplitude_mode(v.text);
    if (!mode) throw ParseError(v.line, "amplitude mode must be flat, rate or crystal");
    c.scenario.amplitude_mode = *mode;
  }};
  amp["b0"] = num("", [](ParsedConfig& c) -> double& { return c.scenario.b0; });
  amp["r2"] = num("1/s", [](ParsedConfig& c) -> double& { return c.scenario.r2_per_s; });

  auto& cr = s["crystal"];
  cr["kappa"] = num("1/mm", [](ParsedConfig& c) -> double& { return c.scenario.crystal.kappa; });
  cr["curvature"] = num("1/mm/GHz^2", [](ParsedConfig& c) -> double& { return c.scenario.crystal.curvature; });
  cr["length"] = num("mm", [](ParsedConfig& c) -> double& { return c.scenario.crystal.length_mm; });
  cr["span"] = num("GHz", [](ParsedConfig& c) -> double& { return c.scenario.crystal.span; });
  cr["points"] = KeySpec{[](const Value& v, ParsedConfig& c) {
    c.scenario.crystal.points = static_cast<std::size_t>(parse_unsigned(v));
  }};
  cr["steps"] = KeySpec{[](const Value& v, ParsedConfig& c) {
    c.scenario.crystal.steps = static_cast<int>(parse_unsigned(v));
  }};
  return s;
}

}  // namespace detail

// Parses and validates a configuration. Errors carry the offending line.
inline ParsedConfig parse_config(std::string_view text) {
  struct Entry {
    std::string section, key;
    detail::Value value;
  };
  std::vector<Entry> entries;
  std::optional<detail::Value> schema, preset;
  std::set<std::pair<std::string, std::string>> seen;
  const auto schema_map = detail::config_schema();

  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (!schema_map.contains(section)) throw ParseError(lineno, "unknown section [" + section + "]");
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
      const std::string key(detail::trim(line.substr(0, eq)));
      const std::string_view value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError(lineno, "empty key");
      if (value.empty()) throw ParseError(lineno, "missing value for '" + key + "'");
      if (!seen.insert({section, key}).second) throw ParseError(lineno, "duplicate key '" + key + "'");
      if (section.empty()) {
        if (key == "schema") schema = detail::Value{value, lineno};
        else if (key == "preset") preset = detail::Value{value, lineno};
        else throw ParseError(lineno, "unknown top-level key '" + key + "'");
      } else {
        if (!schema_map.at(section).contains(key))
          throw ParseError(lineno, "unknown key '" + key + "' in [" + section + "]");
        entries.push_back({section, key, detail::Value{value, lineno}});
      }
    }
    if (eol == text.size()) break;
  }

  if (!schema) throw ParseError(lineno, "missing required key 'schema'");
  if (detail::parse_unsigned(*schema) != static_cast<std::uint64_t>(kSchemaVersion))
    throw ParseError(schema->line, "unsupported schema version '" + std::string(schema->text) + "'");

  ParsedConfig cfg;
  if (preset) {
    const auto fc = parse_figure_case(preset->text);
    if (!fc) throw ParseError(preset->line, "unknown preset '" + std::string(preset->text) + "'");
    cfg.scenario = preset_params(*fc);
    cfg.run.preset = fc;
    cfg.run.figure_case = *fc;
  }
  std::size_t step_line = 0, range_line = 0;
  for (const auto& e : entries) {
    schema_map.at(e.section).at(e.key).apply(e.value, cfg);
    if (e.section == "run" && e.key == "delta_step") step_line = e.value.line;
    if (e.section == "run" && (e.key == "delta_min" || e.key == "delta_max")) range_line = e.value.line;
  }
  if (!(cfg.run.delta_step > 0.0)) throw ParseError(step_line, "delta_step must be positive");
  if (!(cfg.run.delta_max >= cfg.run.delta_min)) throw ParseError(range_line, "delta range bounds are not ordered");
  if (!(cfg.run.dwell_s > 0.0)) throw ConfigError("dwell must be positive");
  return cfg;
}

inline ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ParsedConfig cfg = parse_config(ss.str());
  cfg.run.scenario_path = path.string();
  return cfg;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

}  // namespace detail

// Fully explicit text for the scenario part of a configuration; parsing it
// back gives an identical ScenarioParams.
inline std::string serialize_scenario(const ScenarioParams& p) {
  using detail::format_double;
  std::ostringstream o;
  o << "[pump]\nfrequency = " << format_double(p.pump_frequency) << " GHz\n\n";
  o << "[modulation]\nomega_m = " << format_double(p.omega_m) << " GHz\ntail_tol = " << format_double(p.tail_tol)
    << "\n\n";
  for (int ch : {1, 2}) {
    const ModulatorParams& m = ch == 1 ? p.mod1 : p.mod2;
    o << "[modulator" << ch << "]\ndepth = " << format_double(m.depth) << " rad\nphase = " << format_double(m.phase)
      << " rad\n";
    if (!m.waveform_path.empty()) o << "waveform = " << m.waveform_path << "\n";
    o << "\n";
  }
  o << "[filter1]\nfwhm = " << format_double(p.fwhm1) << " GHz\nalpha_sq = " << format_double(p.alpha1_sq)
    << "\nslit = " << format_double(p.slit1_mm) << " mm\n\n";
  o << "[filter2]\nfwhm = " << format_double(p.fwhm2) << " GHz\nalpha_sq = " << format_double(p.alpha2_sq) << "\n\n";
  o << "[instrument]\ngate = " << format_double(p.gate_ns) << " ns\ndispersion = " << format_double(p.dispersion)
    << " GHz/mm\nfwhm_convention = " << to_string(p.convention) << "\n\n";
  o << "[amplitudes]\nmode = " << to_string(p.amplitude_mode) << "\nb0 = " << format_double(p.b0)
    << "\nr2 = " << format_double(p.r2_per_s) << " 1/s\n\n";
  const CrystalParams& c = p.crystal;
  o << "[crystal]\nkappa = " << format_double(c.kappa) << " 1/mm\ncurvature = " << format_double(c.curvature)
    << " 1/mm/GHz^2\nlength = " << format_double(c.length_mm) << " mm\nspan = " << format_double(c.span)
    << " GHz\npoints = " << c.points << "\nsteps = " << c.steps << "\n";
  return o.str();
}

inline std::string serialize_config(const ParsedConfig& cfg) {
  using detail::format_double;
  std::ostringstream o;
  o << "schema = " << kSchemaVersion << "\n\n[run]\ncommand = " << to_string(cfg.run.command) << "\n";
  if (!cfg.run.output_path.empty()) o << "output = " << cfg.run.output_path << "\n";
  if (!cfg.run.data_path.empty()) o << "data = " << cfg.run.data_path << "\n";
  o << "case = " << to_string(cfg.run.figure_case) << "\ndelta_min = " << format_double(cfg.run.delta_min)
    << " GHz\ndelta_max = " << format_double(cfg.run.delta_max) << " GHz\ndelta_step = "
    << format_double(cfg.run.delta_step) << " GHz\nseed = " << cfg.run.seed << "\ndwell = "
    << format_double(cfg.run.dwell_s) << " s\n\n";
  o << serialize_scenario(cfg.scenario);
  return o.str();
}

}  // namespace modlab
