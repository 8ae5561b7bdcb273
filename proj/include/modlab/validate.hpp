#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "modlab/bessel.hpp"
#include "modlab/correlator.hpp"
#include "modlab/modulation.hpp"
#include "modlab/scenario.hpp"
#include "modlab/spdc.hpp"

namespace modlab {

enum class CheckStatus { pass, fail, skipped };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "fail";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::fail;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::fail; });
  }

  const CheckResult* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["passed"] = passed();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
    return j;
  }
};

// Fault injection for exercising the failure path of run_validate.
struct ValidationHooks {
  bool corrupt_bessel = false;  // perturbs the first-order sideband coefficient
};

namespace detail {

inline std::string sci(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

inline CheckResult threshold_check(std::string name, double value, double limit) {
  CheckResult r{std::move(name), value <= limit ? CheckStatus::pass : CheckStatus::fail,
                "max deviation " + sci(value) + " (limit " + sci(limit) + ")"};
  return r;
}

inline ModulatorSpectrum hooked(ModulatorSpectrum m, const ValidationHooks& hooks) {
  if (hooks.corrupt_bessel && m.K >= 1) m.coeffs[static_cast<std::size_t>(m.K + 1)] *= 1.001;
  return m;
}

template <class F>
CheckResult guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return CheckResult{name, CheckStatus::fail, std::string("exception: ") + e.what()};
  }
}

}  // namespace detail

// Runs the invariant suites of every module plus the model-tier agreement for
// `scenario`. The tier check is skipped when the scenario is outside the
// narrow-filter regime.
inline ValidationReport run_validate(const ExperimentScenario& scenario, const ValidationHooks& hooks = {}) {
  ValidationReport rep;
  const double omega_m = 30.0;
  const double depths[] = {0.5, 1.0, 1.5, 2.5};

  rep.checks.push_back(detail::guarded("bessel_recurrence_vs_series", [&] {
    double worst = 0.0;
    for (double x : {0.5, 1.5, 3.0, 5.0}) {
      const auto seq = bessel_j_sequence(x, 20);
      for (int n = 0; n <= 20; ++n)
        worst = std::max(worst, std::abs(seq[static_cast<std::size_t>(n)] - bessel_j_series(n, x)));
    }
    return detail::threshold_check("bessel_recurrence_vs_series", worst, 1e-13);
  }));

  rep.checks.push_back(detail::guarded("modulator_parseval", [&] {
    double worst = 0.0;
    for (double d : depths)
      for (double phi : {0.0, 0.7, kPi})
        worst = std::max(worst, std::abs(sinusoidal_coeffs(d, phi, omega_m).total_power() - 1.0));
    return detail::threshold_check("modulator_parseval", worst, 1e-10);
  }));

  rep.checks.push_back(detail::guarded("addition_theorem", [&] {
    double worst = 0.0;
    for (double d1 : depths)
      for (double d2 : depths)
        for (double rel : {0.0, kPi}) {
          const auto q = detail::hooked(sinusoidal_coeffs(d1, 0.0, omega_m), hooks);
          const auto r = sinusoidal_coeffs(d2, rel, omega_m);
          const auto s = compose_nonlocal(q, r);
          const double sum = rel == 0.0 ? d1 + d2 : d1 - d2;
          for (int n = -s.N; n <= s.N; ++n)
            worst = std::max(worst, std::abs(std::abs(s.coeff(n)) - std::abs(bessel_j_series(n, sum))));
        }
    return detail::threshold_check("addition_theorem", worst, 1e-9);
  }));

  rep.checks.push_back(detail::guarded("phase_covariance", [&] {
    double worst = 0.0;
    for (double phi : {0.3, 1.1, 2.9}) {
      const auto base = compose_nonlocal(sinusoidal_coeffs(1.5, 0.0, omega_m), sinusoidal_coeffs(1.0, 0.4, omega_m));
      // a common drive delay only multiplies s_n by exp(-i n phi)
      const auto moved =
          compose_nonlocal(sinusoidal_coeffs(1.5, phi, omega_m), sinusoidal_coeffs(1.0, 0.4 + phi, omega_m));
      for (int n = -base.N; n <= base.N; ++n)
        worst = std::max(worst, std::abs(std::norm(base.coeff(n)) - std::norm(moved.coeff(n))));
    }
    return detail::threshold_check("phase_covariance", worst, 1e-12);
  }));

  rep.checks.push_back(detail::guarded("waveform_vs_bessel", [&] {
    std::vector<double> phi(512);
    for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = 1.5 * std::cos(2.0 * kPi * static_cast<double>(j) / 512.0);
    const auto w = coeffs_from_waveform(phi, omega_m);
    const auto b = sinusoidal_coeffs(1.5, 0.0, omega_m);
    double worst = 0.0;
    for (int k = -std::max(w.K, b.K); k <= std::max(w.K, b.K); ++k)
      worst = std::max(worst, std::abs(w.coeff(k) - b.coeff(k)));
    return detail::threshold_check("waveform_vs_bessel", worst, 1e-10);
  }));

  rep.checks.push_back(detail::guarded("rk4_unitarity", [&] {
    const auto grid = FrequencyGrid::paired(563519.66, 2000.0, 201);
    double worst = 0.0;
    for (double dk : {0.0, 0.2}) {
      const auto amps = propagate_envelopes(CrystalProfile::uniform(grid, 0.05, dk, 20.0), grid, 256);
      worst = std::max({worst, amps.unitarity_residual(), amps.symmetry_residual()});
    }
    return detail::threshold_check("rk4_unitarity", worst, 1e-9);
  }));

  rep.checks.push_back(detail::guarded("rk4_vs_analytic", [&] {
    const auto grid = FrequencyGrid::paired(563519.66, 10.0, 3);
    const auto amps = propagate_envelopes(CrystalProfile::uniform(grid, 0.05, 0.0, 20.0), grid, 256);
    const auto exact = analytic_amplitudes(0.05, 0.0, 20.0);
    const double err = std::max(std::abs(amps.A[1] - exact.A0), std::abs(amps.B[1] - exact.B0));
    return detail::threshold_check("rk4_vs_analytic", err, 1e-10);
  }));

  rep.checks.push_back(detail::guarded("rk4_order", [&] {
    const auto grid = FrequencyGrid::paired(563519.66, 10.0, 3);
    const auto exact = analytic_amplitudes(0.05, 0.2, 20.0);
    auto err = [&](int steps) {
      const auto a = propagate_envelopes(CrystalProfile::uniform(grid, 0.05, 0.2, 20.0), grid, steps);
      return std::max(std::abs(a.A[1] - exact.A0), std::abs(a.B[1] - exact.B0));
    };
    const double order = std::log2(err(16) / err(32));
    CheckResult r{"rk4_order", order >= 3.8 ? CheckStatus::pass : CheckStatus::fail,
                  "observed order " + std::to_string(order) + " (minimum 3.8)"};
    return r;
  }));

  rep.checks.push_back(detail::guarded("area_conservation", [&] {
    const int span_n = 2 * (sinusoidal_coeffs(1.5, 0.0, omega_m).K) + 1;
    const auto axis = make_axis(-span_n * omega_m, span_n * omega_m, 0.5);
    double first = 0.0, worst = 0.0;
    for (FigureCase c : kAllFigureCases) {
      const double a = total_paired_area(coincidence_trace(figure_preset(c), axis));
      if (c == FigureCase::fig3a) first = a;
      worst = std::max(worst, std::abs(a / first - 1.0));
    }
    return detail::threshold_check("area_conservation", worst, 1e-9);
  }));

  rep.checks.push_back(detail::guarded("tier_agreement", [&] {
    const RegimeReport regime = regime_report(scenario);
    if (!regime.valid)
      return CheckResult{"tier_agreement", CheckStatus::skipped,
                         "scenario outside the narrow-filter regime (w_m/Gamma = " +
                             std::to_string(regime.mod_to_filter) + ", Gamma*T = " +
                             std::to_string(regime.filter_to_gate) + ")"};
    const auto axis = make_axis(-150.0, 150.0, 1.0);
    const auto simple = coincidence_trace(scenario, axis);
    const auto full = coincidence_full(scenario, axis);
    double se = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i) {
      se += (full.total[i] - simple.total[i]) * (full.total[i] - simple.total[i]);
      sr += simple.total[i] * simple.total[i];
    }
    return detail::threshold_check("tier_agreement", std::sqrt(se / sr), 1e-2);
  }));

  return rep;
}

}  // namespace modlab
