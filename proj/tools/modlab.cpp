// modlab: scans, figure presets, fits and self-validation for the nonlocal
// modulation simulator.
//
// Exit codes: 0 success, 1 validation or fit failure, 2 configuration error,
// 3 I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "modlab/modlab.hpp"

namespace {

enum ExitCode { kOk = 0, kFailed = 1, kConfig = 2, kIo = 3 };

struct Options {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> dwell;
  bool gnuplot_style = false;
  std::string figure_case;
  std::string data_path;
  std::string model = "trace";
  std::string fault;
};

modlab::ParsedConfig load(const Options& o, modlab::Command cmd) {
  modlab::ParsedConfig cfg;
  if (!o.config_path.empty()) cfg = modlab::load_config(o.config_path);
  cfg.run.command = cmd;
  if (!o.out_path.empty()) cfg.run.output_path = o.out_path;
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.dwell) {
    if (!(*o.dwell > 0.0)) throw modlab::ConfigError("--dwell must be positive");
    cfg.run.dwell_s = *o.dwell;
  }
  if (!o.data_path.empty()) cfg.run.data_path = o.data_path;
  if (!o.figure_case.empty()) {
    const auto fc = modlab::parse_figure_case(o.figure_case);
    if (!fc) throw modlab::ConfigError("unknown figure case '" + o.figure_case + "'");
    cfg.run.figure_case = *fc;
  }
  return cfg;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) std::cout << text;
  else modlab::write_text_file(path, text);
}

int run_scan(const Options& o) {
  const auto cfg = load(o, modlab::Command::scan);
  const auto scenario = modlab::build_scenario(cfg.scenario);
  const auto axis = modlab::make_axis(cfg.run.delta_min, cfg.run.delta_max, cfg.run.delta_step);
  if (o.model != "trace" && o.model != "full") throw modlab::ConfigError("--model must be 'trace' or 'full'");
  const auto trace =
      o.model == "full" ? modlab::coincidence_full(scenario, axis) : modlab::coincidence_trace(scenario, axis);
  if (trace.truncated_samples > 0)
    std::cerr << "warning: " << trace.truncated_samples
              << " samples lie beyond the sideband coefficient support; their paired rate is 0\n";
  modlab::TraceMetadata meta;
  meta.command = "scan";
  meta.scenario_hash = modlab::scenario_hash(cfg.scenario);
  meta.seed = cfg.run.seed;
  meta.model = o.model;
  if (cfg.run.output_path.empty()) modlab::write_trace(std::cout, trace, o.gnuplot_style);
  else modlab::emit_trace(trace, cfg.run.output_path, meta, o.gnuplot_style);
  return kOk;
}

int run_figure(const Options& o) {
  auto cfg = load(o, modlab::Command::figure);
  const auto params = modlab::preset_params(cfg.run.figure_case);
  const auto scenario = modlab::build_scenario(params);
  const auto axis = modlab::make_axis(cfg.run.delta_min, cfg.run.delta_max, cfg.run.delta_step);
  const auto trace = modlab::coincidence_trace(scenario, axis);
  modlab::CountData data{axis, modlab::synthesize_counts(trace, cfg.run.dwell_s, cfg.run.seed), cfg.run.dwell_s};

  modlab::TraceMetadata meta;
  meta.command = "figure " + std::string(modlab::to_string(cfg.run.figure_case));
  meta.scenario_hash = modlab::scenario_hash(params);
  meta.seed = cfg.run.seed;
  meta.model = "trace";
  std::filesystem::path out = cfg.run.output_path.empty()
                                  ? std::filesystem::path(std::string(modlab::to_string(cfg.run.figure_case)) + ".csv")
                                  : std::filesystem::path(cfg.run.output_path);
  modlab::emit_trace(trace, out, meta, o.gnuplot_style);
  std::filesystem::path counts_path = out;
  counts_path.replace_extension(".counts.csv");
  std::ostringstream counts;
  modlab::write_counts(counts, data);
  modlab::write_text_file(counts_path, counts.str());
  std::cout << "wrote " << out.string() << " and " << counts_path.string() << "\n";
  return kOk;
}

int run_fit(const Options& o) {
  const auto cfg = load(o, modlab::Command::fit);
  const auto scenario = modlab::build_scenario(cfg.scenario);
  modlab::CountData data;
  if (!cfg.run.data_path.empty()) {
    data = modlab::load_counts(cfg.run.data_path, cfg.run.dwell_s);
  } else {
    data.delta = modlab::make_axis(cfg.run.delta_min, cfg.run.delta_max, cfg.run.delta_step);
    data.counts = modlab::synthesize_counts(modlab::coincidence_trace(scenario, data.delta), cfg.run.dwell_s,
                                            cfg.run.seed);
    data.dwell_s = cfg.run.dwell_s;
  }
  try {
    const auto fit = modlab::fit_scale(data, scenario);
    write_output(cfg.run.output_path, modlab::to_json(fit).dump(2) + "\n");
    return kOk;
  } catch (const modlab::FitError& e) {
    std::cerr << "fit failed: " << e.what() << "\n" << modlab::to_json(e.best()).dump(2) << "\n";
    return kFailed;
  }
}

int run_validate_cmd(const Options& o) {
  const auto cfg = load(o, modlab::Command::validate);
  modlab::ValidationHooks hooks;
  if (o.fault == "corrupt-bessel") hooks.corrupt_bessel = true;
  else if (!o.fault.empty()) throw modlab::ConfigError("unknown fault hook '" + o.fault + "'");
  const auto scenario = o.config_path.empty() ? modlab::figure_preset(modlab::FigureCase::fig3b)
                                              : modlab::build_scenario(cfg.scenario);
  const auto report = modlab::run_validate(scenario, hooks);
  write_output(cfg.run.output_path, report.to_json().dump(2) + "\n");
  for (const auto& c : report.checks)
    if (c.status == modlab::CheckStatus::fail) std::cerr << "FAILED " << c.name << ": " << c.detail << "\n";
  return report.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal modulation simulator: frequency-correlation traces of entangled photon pairs"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Configuration file");
    sub->add_option("--out", o.out_path, "Output file (stdout if omitted, where supported)");
    sub->add_option("--seed", o.seed, "Random seed for synthetic counts");
    sub->add_option("--dwell", o.dwell, "Dwell time per sample in seconds");
    sub->add_flag("--gnuplot-style", o.gnuplot_style, "Whitespace-separated output");
  };
  auto* scan = app.add_subcommand("scan", "Coincidence trace over a Delta range");
  common(scan);
  scan->add_option("--model", o.model, "trace (sideband model) or full (pair-kernel model)");
  auto* figure = app.add_subcommand("figure", "Preset figure case with synthetic shot-noise counts");
  common(figure);
  figure->add_option("--case", o.figure_case, "fig3a, fig3b, fig4a or fig4b");
  auto* fit = app.add_subcommand("fit", "Fit scale factors and offset to counts");
  common(fit);
  fit->add_option("--data", o.data_path, "CSV with delta_ghz,counts (synthesized if omitted)");
  auto* validate = app.add_subcommand("validate", "Run the invariant suites");
  common(validate);
  validate->add_option("--inject-fault", o.fault, "Test hook: corrupt-bessel")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (scan->parsed()) return run_scan(o);
    if (figure->parsed()) return run_figure(o);
    if (fit->parsed()) return run_fit(o);
    if (validate->parsed()) return run_validate_cmd(o);
  } catch (const modlab::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const modlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const modlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
