#pragma once

#include <numbers>

namespace modlab {

// Frequencies are ordinary frequencies in GHz, times in ns, slit positions in
// mm. Spectral integrals over GHz yield rates per ns; public rates are counts/s.
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kPerNsToPerS = 1e9;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline constexpr double frequency_ghz_from_wavelength_nm(double nm) {
  return kSpeedOfLight / nm;  // (m/s) / (1e-9 m) = 1e9 Hz
}

}  // namespace modlab
