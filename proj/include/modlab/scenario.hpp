#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "modlab/error.hpp"
#include "modlab/filter.hpp"
#include "modlab/modulation.hpp"
#include "modlab/spdc.hpp"
#include "modlab/units.hpp"

namespace modlab {

enum class FigureCase { fig3a, fig3b, fig4a, fig4b };

inline constexpr FigureCase kAllFigureCases[] = {FigureCase::fig3a, FigureCase::fig3b, FigureCase::fig4a,
                                                 FigureCase::fig4b};

inline std::string_view to_string(FigureCase c) {
  switch (c) {
    case FigureCase::fig3a: return "fig3a";
    case FigureCase::fig3b: return "fig3b";
    case FigureCase::fig4a: return "fig4a";
    case FigureCase::fig4b: return "fig4b";
  }
  return "fig3a";
}

inline std::optional<FigureCase> parse_figure_case(std::string_view s) {
  for (FigureCase c : kAllFigureCases)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

// How the flat-band constants (and optionally sampled amplitudes) are obtained.
//   flat:    |B0| given directly.
//   rate:    |B0| inverted from a measured channel-2 singles rate.
//   crystal: A(w), B(w) integrated through a crystal with quadratic mismatch.
enum class AmplitudeMode { flat, rate, crystal };

inline std::string_view to_string(AmplitudeMode m) {
  switch (m) {
    case AmplitudeMode::flat: return "flat";
    case AmplitudeMode::rate: return "rate";
    case AmplitudeMode::crystal: return "crystal";
  }
  return "flat";
}

inline std::optional<AmplitudeMode> parse_amplitude_mode(std::string_view s) {
  if (s == "flat") return AmplitudeMode::flat;
  if (s == "rate") return AmplitudeMode::rate;
  if (s == "crystal") return AmplitudeMode::crystal;
  return std::nullopt;
}

struct ModulatorParams {
  double depth = 0.0;  // rad
  double phase = 0.0;  // rad
  std::string waveform_path;  // non-empty: ingest exp[i Phi(t)] from file instead

  bool operator==(const ModulatorParams&) const = default;
};

struct CrystalParams {
  double kappa = 0.00841;      // 1/mm, real coupling
  double curvature = 7.73e-9;  // 1/mm per GHz^2 of detuning from degeneracy
  double length_mm = 20.0;
  double span = 2400.0;        // GHz, amplitude grid width
  std::size_t points = 2401;
  int steps = kDefaultPropagationSteps;

  bool operator==(const CrystalParams&) const = default;
};

// Plain, serializable description of an experiment; build_scenario() turns it
// into the derived spectra, filters and amplitudes.
struct ScenarioParams {
  double pump_frequency = frequency_ghz_from_wavelength_nm(532.0);  // GHz
  double omega_m = 30.0;                                            // GHz
  double tail_tol = kDefaultTailTolerance;
  ModulatorParams mod1;
  ModulatorParams mod2;
  double fwhm1 = 8.5;  // GHz
  double fwhm2 = 8.5;  // GHz
  double alpha1_sq = 1.20e-2;
  double alpha2_sq = 5.59e-4;
  double slit1_mm = 0.5 * frequency_ghz_from_wavelength_nm(532.0) / 210.0;
  double gate_ns = 1.25;
  double dispersion = 210.0;  // GHz/mm
  FwhmConvention convention = FwhmConvention::intensity;
  AmplitudeMode amplitude_mode = AmplitudeMode::rate;
  double b0 = 0.169;        // |B0| for flat mode
  double r2_per_s = 1.15e4;  // measured channel-2 singles for rate mode
  CrystalParams crystal;

  bool operator==(const ScenarioParams&) const = default;
};

struct ExperimentScenario {
  ScenarioParams params;
  double pump_frequency = 0.0;
  SpectralAmplitudes amplitudes;
  ModulatorSpectrum mod1;
  ModulatorSpectrum mod2;
  GaussianFilter filter1;  // slit fixed at x1
  GaussianFilter filter2;  // slit at the Delta = 0 position; scanned by the correlator
  double gate_ns = 1.25;
  double dispersion = 210.0;

  // Delta = beta (x1 + x2) - w_p  =>  x2 = (Delta + w_p) / beta - x1.
  double slit2_for_delta(double delta) const {
    return (delta + pump_frequency) / dispersion - filter1.slit_mm;
  }

  GaussianFilter filter2_at(double delta) const {
    GaussianFilter f = filter2;
    f.slit_mm = slit2_for_delta(delta);
    return f;
  }
};

inline ModulatorSpectrum build_modulator(const ModulatorParams& p, double omega_m, double tail_tol) {
  if (!p.waveform_path.empty()) return coeffs_from_waveform(load_waveform(p.waveform_path), omega_m);
  return sinusoidal_coeffs(p.depth, p.phase, omega_m, tail_tol);
}

inline ExperimentScenario build_scenario(const ScenarioParams& p) {
  if (!(p.gate_ns > 0.0)) throw ConfigError("gate width must be positive");
  if (!(p.dispersion > 0.0)) throw ConfigError("dispersion must be positive");
  if (!(p.pump_frequency > 0.0)) throw ConfigError("pump frequency must be positive");
  if (!(p.omega_m > 0.0)) throw ConfigError("drive frequency must be positive");
  if (!(p.alpha1_sq >= 0.0) || !(p.alpha2_sq >= 0.0)) throw ConfigError("alpha^2 must be nonnegative");

  ExperimentScenario s;
  s.params = p;
  s.pump_frequency = p.pump_frequency;
  s.gate_ns = p.gate_ns;
  s.dispersion = p.dispersion;
  s.mod1 = build_modulator(p.mod1, p.omega_m, p.tail_tol);
  s.mod2 = build_modulator(p.mod2, p.omega_m, p.tail_tol);
  s.filter1 = GaussianFilter{p.fwhm1, std::sqrt(p.alpha1_sq), p.slit1_mm, p.dispersion, p.convention};
  s.filter2 = GaussianFilter{p.fwhm2, std::sqrt(p.alpha2_sq), 0.0, p.dispersion, p.convention};
  s.filter2.slit_mm = s.slit2_for_delta(0.0);
  s.filter1.validate();
  s.filter2.validate();

  switch (p.amplitude_mode) {
    case AmplitudeMode::flat: {
      if (!(p.b0 >= 0.0)) throw ConfigError("|B0| must be nonnegative");
      s.amplitudes = SpectralAmplitudes::flat(cplx{std::sqrt(1.0 + p.b0 * p.b0)}, cplx{p.b0});
      break;
    }
    case AmplitudeMode::rate: {
      const AmplitudePair ab = amplitudes_from_rate(p.r2_per_s, s.filter2);
      s.amplitudes = SpectralAmplitudes::flat(ab.A0, ab.B0);
      break;
    }
    case AmplitudeMode::crystal: {
      const auto& c = p.crystal;
      const FrequencyGrid grid = FrequencyGrid::paired(p.pump_frequency, c.span, c.points);
      grid.validate();
      s.amplitudes = propagate_envelopes(
          CrystalProfile::quadratic_mismatch(grid, cplx{c.kappa}, c.curvature, c.length_mm), grid, c.steps);
      break;
    }
  }
  return s;
}

// Instrument defaults of the experiment with the modulator settings of each
// figure panel.
inline ScenarioParams preset_params(FigureCase c) {
  ScenarioParams p;
  switch (c) {
    case FigureCase::fig3a: break;
    case FigureCase::fig3b: p.mod1.depth = 1.5; break;
    case FigureCase::fig4a:
      p.mod1.depth = 1.5;
      p.mod2.depth = 1.5;
      break;
    case FigureCase::fig4b:
      p.mod1.depth = 1.5;
      p.mod2.depth = 1.5;
      p.mod2.phase = kPi;
      break;
  }
  return p;
}

inline ExperimentScenario figure_preset(FigureCase c) { return build_scenario(preset_params(c)); }

struct RegimeReport {
  double mod_to_filter = 0.0;   // omega_m / Gamma
  double filter_to_gate = 0.0;  // Gamma * T (Gamma in cycles/ns)
  bool valid = false;
};

inline constexpr double kMinModToFilter = 3.0;
inline constexpr double kMinFilterToGate = 10.0;

// Ratios behind the narrow-filter approximations of the coincidence model:
// filters narrow compared with the sideband spacing and wide compared with 1/T.
inline RegimeReport regime_report(const ExperimentScenario& s) {
  const double wide = std::max(s.filter1.fwhm, s.filter2.fwhm);
  const double narrow = std::min(s.filter1.fwhm, s.filter2.fwhm);
  RegimeReport r;
  r.mod_to_filter = s.mod1.omega_m / wide;
  r.filter_to_gate = narrow * s.gate_ns;
  r.valid = r.mod_to_filter > kMinModToFilter && r.filter_to_gate > kMinFilterToGate;
  return r;
}

}  // namespace modlab
