#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "modlab/bessel.hpp"
#include "modlab/error.hpp"
#include "modlab/fft.hpp"

namespace modlab {

using cplx = std::complex<double>;

enum class ModulatorKind { sinusoidal, waveform };

// Fourier-series transfer function m(t) = sum_k q_k exp(-i k omega_m t),
// stored for k = -K..K.
struct ModulatorSpectrum {
  double omega_m = 30.0;  // GHz
  int K = 0;
  std::vector<cplx> coeffs{cplx{1.0}};
  double depth = 0.0;        // peak phase excursion (rad)
  double drive_phase = 0.0;  // rad
  ModulatorKind kind = ModulatorKind::sinusoidal;

  cplx coeff(int k) const {
    if (k < -K || k > K) return {};
    return coeffs[static_cast<std::size_t>(k + K)];
  }

  double total_power() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return s;
  }

  double tail_power() const { return K == 0 ? 0.0 : std::norm(coeff(K)) + std::norm(coeff(-K)); }

  // True when every coefficient beyond K is exactly zero.
  bool exact_support() const { return kind == ModulatorKind::sinusoidal && depth == 0.0; }
};

// s_n = sum_k q_k r_{n-k}, n = -N..N.
struct NonlocalCoefficients {
  int N = 0;
  std::vector<cplx> s{cplx{1.0}};

  cplx coeff(int n) const {
    if (n < -N || n > N) return {};
    return s[static_cast<std::size_t>(n + N)];
  }

  bool in_support(int n) const { return n >= -N && n <= N; }

  double total_power() const {
    double t = 0.0;
    for (const auto& c : s) t += std::norm(c);
    return t;
  }
};

inline constexpr double kDefaultTailTolerance = 1e-24;

// exp[i depth cos(omega_m t + drive_phase)]. Jacobi-Anger gives
// q_k = i^k J_k(depth) exp(-i k drive_phase); K is the first order past the
// turning point whose two boundary terms carry less than tail_tol of the power.
inline ModulatorSpectrum sinusoidal_coeffs(double depth, double drive_phase, double omega_m,
                                           double tail_tol = kDefaultTailTolerance) {
  if (!(tail_tol > 0.0)) throw ConfigError("tail tolerance must be positive");
  if (!(omega_m > 0.0)) throw ConfigError("drive frequency must be positive");

  const int nmax = static_cast<int>(std::abs(depth)) + 80;
  const std::vector<double> j = bessel_j_sequence(depth, nmax);
  int K = 1;
  while (K < nmax && (static_cast<double>(K) <= std::abs(depth) || 2.0 * j[static_cast<std::size_t>(K)] *
                                                                        j[static_cast<std::size_t>(K)] >=
                                                                        tail_tol))
    ++K;

  ModulatorSpectrum m;
  m.omega_m = omega_m;
  m.K = K;
  m.depth = depth;
  m.drive_phase = drive_phase;
  m.kind = ModulatorKind::sinusoidal;
  m.coeffs.assign(static_cast<std::size_t>(2 * K + 1), cplx{});
  static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int k = -K; k <= K; ++k) {
    const int ak = std::abs(k);
    double jk = j[static_cast<std::size_t>(ak)];
    if (k < 0 && ak % 2 == 1) jk = -jk;
    const cplx ik = kIPow[((k % 4) + 4) % 4];
    m.coeffs[static_cast<std::size_t>(k + K)] = ik * jk * std::polar(1.0, -k * drive_phase);
  }
  return m;
}

inline ModulatorSpectrum identity_modulator(double omega_m) { return sinusoidal_coeffs(0.0, 0.0, omega_m); }

inline constexpr std::size_t kMinWaveformSamples = 64;

// Coefficients of exp[i Phi(t)] from uniform samples Phi(t_j), t_j = j T/N,
// j = 0..N-1: q_k = (1/N) sum_j exp(i Phi_j) exp(+2 pi i k j / N). Bins are
// assigned to k in [-N/2, N/2 - 1]; numerically empty outer orders are dropped.
inline ModulatorSpectrum coeffs_from_waveform(std::span<const double> phase_samples, double omega_m) {
  const std::size_t n = phase_samples.size();
  if (n < kMinWaveformSamples)
    throw ConfigError("waveform needs at least " + std::to_string(kMinWaveformSamples) +
                      " samples per period, got " + std::to_string(n));
  if (!(omega_m > 0.0)) throw ConfigError("drive frequency must be positive");

  std::vector<cplx> in(n), out(n);
  for (std::size_t j = 0; j < n; ++j) in[j] = std::polar(1.0, phase_samples[j]);
  FftPlan plan(n, FftDirection::backward);
  plan.execute(in, out);

  const int half = static_cast<int>(n / 2);
  auto bin = [&](int k) -> cplx {
    if (k < -half || k > half) return {};
    if (k == half) return (n % 2 == 1) ? out[static_cast<std::size_t>(k)] / static_cast<double>(n) : cplx{};
    const std::size_t idx = k >= 0 ? static_cast<std::size_t>(k) : static_cast<std::size_t>(k + static_cast<int>(n));
    return out[idx] / static_cast<double>(n);
  };

  constexpr double kEmpty = 1e-32;
  int K = half;
  while (K > 1 && std::norm(bin(K)) < kEmpty && std::norm(bin(-K)) < kEmpty) --K;

  ModulatorSpectrum m;
  m.omega_m = omega_m;
  m.K = K;
  m.coeffs.resize(static_cast<std::size_t>(2 * K + 1));
  for (int k = -K; k <= K; ++k) m.coeffs[static_cast<std::size_t>(k + K)] = bin(k);
  const auto [lo, hi] = std::minmax_element(phase_samples.begin(), phase_samples.end());
  m.depth = 0.5 * (*hi - *lo);
  m.drive_phase = 0.0;
  m.kind = ModulatorKind::waveform;
  return m;
}

// Two-column text (time as a fraction of one period, phase in radians);
// '#' starts a comment. Times must be the uniform sequence j/N.
inline std::vector<double> read_waveform(std::istream& in) {
  std::vector<double> times, phases;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double t = 0.0, p = 0.0;
    if (!(ls >> t)) continue;
    std::string extra;
    if (!(ls >> p) || (ls >> extra)) throw ParseError(lineno, "expected two columns: time_fraction phase_rad");
    times.push_back(t);
    phases.push_back(p);
  }
  const std::size_t n = times.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(times[j] - static_cast<double>(j) / static_cast<double>(n)) > 1e-9)
      throw ConfigError("waveform times must be uniform fractions j/N of one period starting at 0");
  }
  return phases;
}

inline std::vector<double> load_waveform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open waveform file " + path.string());
  return read_waveform(in);
}

// Discrete convolution of the two channels' coefficients over the full
// (Kq + Kr) support.
inline NonlocalCoefficients compose_nonlocal(const ModulatorSpectrum& q, const ModulatorSpectrum& r) {
  const double scale = std::max(std::abs(q.omega_m), std::abs(r.omega_m));
  if (std::abs(q.omega_m - r.omega_m) > 1e-12 * scale)
    throw ConfigError("modulators must share one drive frequency");
  NonlocalCoefficients out;
  out.N = q.K + r.K;
  out.s.assign(static_cast<std::size_t>(2 * out.N + 1), cplx{});
  for (int k = -q.K; k <= q.K; ++k) {
    const cplx qk = q.coeff(k);
    if (qk == cplx{}) continue;
    for (int l = -r.K; l <= r.K; ++l) out.s[static_cast<std::size_t>(k + l + out.N)] += qk * r.coeff(l);
  }
  return out;
}

}  // namespace modlab
