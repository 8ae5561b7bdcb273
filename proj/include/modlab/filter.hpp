#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "modlab/error.hpp"
#include "modlab/units.hpp"

namespace modlab {

// Which quantity the configured FWHM describes.
//   intensity: |H|^2 has FWHM Gamma, i.e. H = alpha * exp(-2 ln2 w^2 / Gamma^2).
//   field:     H itself has FWHM Gamma, i.e. H = alpha * exp(-4 ln2 w^2 / Gamma^2).
enum class FwhmConvention { field, intensity };

inline std::string_view to_string(FwhmConvention c) {
  return c == FwhmConvention::field ? "field" : "intensity";
}

inline std::optional<FwhmConvention> parse_fwhm_convention(std::string_view s) {
  if (s == "field") return FwhmConvention::field;
  if (s == "intensity") return FwhmConvention::intensity;
  return std::nullopt;
}

// Monochromator field transmission, centered at dispersion * slit_mm.
struct GaussianFilter {
  double fwhm = 8.5;       // GHz
  double amplitude = 1.0;  // alpha
  double slit_mm = 0.0;
  double dispersion = 210.0;  // GHz/mm
  FwhmConvention convention = FwhmConvention::intensity;

  void validate() const {
    if (!(fwhm > 0.0)) throw ConfigError("filter FWHM must be positive");
    if (!(amplitude >= 0.0)) throw ConfigError("filter amplitude must be nonnegative");
    if (!(dispersion > 0.0)) throw ConfigError("dispersion must be positive");
  }

  double center() const { return dispersion * slit_mm; }

  // FWHM of |H|^2.
  double intensity_fwhm() const {
    return convention == FwhmConvention::intensity ? fwhm : fwhm / std::sqrt(2.0);
  }

  // Standard deviation of the Gaussian |H(w)|^2.
  double intensity_sigma() const { return intensity_fwhm() / std::sqrt(8.0 * kLn2); }

  // H at detuning w from the filter center.
  double field(double w) const {
    const double s = intensity_sigma();
    return amplitude * std::exp(-w * w / (4.0 * s * s));
  }

  double intensity(double w) const {
    const double s = intensity_sigma();
    return amplitude * amplitude * std::exp(-w * w / (2.0 * s * s));
  }

  // Integral of |H|^2 over all detunings.
  double intensity_integral() const {
    return amplitude * amplitude * std::sqrt(2.0 * kPi) * intensity_sigma();
  }

  // Half-width beyond which |H|^2 is below ~1e-37 of its peak.
  double cutoff() const { return 13.0 * intensity_sigma(); }
};

// H2(w) = |H1|^2 * |H2|^2 (convolution), a Gaussian for Gaussian filters.
struct H2Profile {
  double peak = 0.0;   // value at w = 0
  double sigma = 1.0;  // standard deviation

  double operator()(double w) const { return peak * std::exp(-w * w / (2.0 * sigma * sigma)); }
  double derivative(double w) const { return -w / (sigma * sigma) * (*this)(w); }
  double fwhm() const { return std::sqrt(8.0 * kLn2) * sigma; }
  double area() const { return peak * std::sqrt(2.0 * kPi) * sigma; }
};

inline H2Profile h2_profile(const GaussianFilter& f1, const GaussianFilter& f2) {
  const double s1 = f1.intensity_sigma();
  const double s2 = f2.intensity_sigma();
  const double s = std::hypot(s1, s2);
  const double a = f1.amplitude * f1.amplitude * f2.amplitude * f2.amplitude;
  return H2Profile{a * std::sqrt(2.0 * kPi) * s1 * s2 / s, s};
}

}  // namespace modlab
