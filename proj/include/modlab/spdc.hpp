#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "modlab/error.hpp"
#include "modlab/filter.hpp"
#include "modlab/units.hpp"

namespace modlab {

using cplx = std::complex<double>;

// Uniform frequency samples symmetric about pump_frequency / 2, so that sample
// i and sample points-1-i are conjugate (w and w_p - w).
struct FrequencyGrid {
  double center = 0.0;  // GHz
  double span = 1.0;    // GHz
  std::size_t points = 2;
  double pump_frequency = 0.0;  // GHz

  static FrequencyGrid paired(double pump_frequency, double span, std::size_t points) {
    return FrequencyGrid{0.5 * pump_frequency, span, points, pump_frequency};
  }

  double step() const { return span / static_cast<double>(points - 1); }
  double lowest() const { return center - 0.5 * span; }
  double highest() const { return center + 0.5 * span; }
  double frequency(std::size_t i) const { return lowest() + static_cast<double>(i) * step(); }
  std::size_t conjugate_index(std::size_t i) const { return points - 1 - i; }

  bool is_paired() const {
    const double scale = std::max({1.0, std::abs(pump_frequency), std::abs(center)});
    return std::abs(center - 0.5 * pump_frequency) <= 1e-12 * scale;
  }

  void validate() const {
    if (points < 2) throw ConfigError("frequency grid needs at least 2 points");
    if (!(span > 0.0)) throw ConfigError("frequency grid span must be positive");
    if (!is_paired())
      throw ConfigError("frequency grid must be centered on pump_frequency/2 so every sample has its conjugate");
  }
};

// Coupling and phase mismatch sampled on a FrequencyGrid.
struct CrystalProfile {
  std::vector<cplx> kappa;       // 1/mm
  std::vector<double> delta_k;   // 1/mm
  double length_mm = 1.0;

  static CrystalProfile uniform(const FrequencyGrid& grid, cplx kappa0, double delta_k0, double length) {
    return CrystalProfile{std::vector<cplx>(grid.points, kappa0), std::vector<double>(grid.points, delta_k0),
                          length};
  }

  // delta_k grows quadratically with detuning from degeneracy, the usual
  // group-velocity-dispersion limited bandwidth of a type-0 crystal.
  static CrystalProfile quadratic_mismatch(const FrequencyGrid& grid, cplx kappa0, double curvature,
                                           double length) {
    CrystalProfile p{std::vector<cplx>(grid.points, kappa0), std::vector<double>(grid.points), length};
    for (std::size_t i = 0; i < grid.points; ++i) {
      const double d = grid.frequency(i) - grid.center;
      p.delta_k[i] = curvature * d * d;
    }
    return p;
  }

  void validate(const FrequencyGrid& grid) const {
    if (kappa.size() != grid.points || delta_k.size() != grid.points)
      throw ConfigError("crystal profile sample count must equal grid points");
    if (!(length_mm > 0.0)) throw ConfigError("crystal length must be positive");
    // The pair (w, w_p - w) shares one coupling and one mismatch.
    for (std::size_t i = 0; i < grid.points; ++i) {
      const std::size_t j = grid.conjugate_index(i);
      const double ks = std::max(1.0, std::abs(kappa[i]));
      const double ds = std::max(1.0, std::abs(delta_k[i]));
      if (std::abs(kappa[i] - kappa[j]) > 1e-12 * ks || std::abs(delta_k[i] - delta_k[j]) > 1e-12 * ds)
        throw ConfigError("crystal profile must be symmetric under w -> w_p - w");
    }
  }
};

struct AmplitudePair {
  cplx A0{1.0, 0.0};
  cplx B0{0.0, 0.0};
};

// Output-field coefficients a_out(w) = A(w) a_vac(w) + B(w) a_vac^dag(w_p - w).
// With no grid the amplitudes are flat: A(w) = A0 and B(w) = B0 everywhere.
struct SpectralAmplitudes {
  std::optional<FrequencyGrid> grid;
  std::vector<cplx> A;
  std::vector<cplx> B;
  cplx A0{1.0, 0.0};
  cplx B0{0.0, 0.0};

  static SpectralAmplitudes flat(cplx a0, cplx b0) {
    SpectralAmplitudes s;
    s.A0 = a0;
    s.B0 = b0;
    return s;
  }

  bool is_flat() const { return !grid.has_value(); }

  bool covers(double lo, double hi) const {
    if (is_flat()) return true;
    const double eps = 1e-9 * grid->step();
    return lo >= grid->lowest() - eps && hi <= grid->highest() + eps;
  }

  cplx a_at(double omega) const { return is_flat() ? A0 : interpolate(A, omega); }
  cplx b_at(double omega) const { return is_flat() ? B0 : interpolate(B, omega); }

  // max over samples of | |A|^2 - |B|^2 - 1 |
  double unitarity_residual() const {
    if (is_flat()) return std::abs(std::norm(A0) - std::norm(B0) - 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
      worst = std::max(worst, std::abs(std::norm(A[i]) - std::norm(B[i]) - 1.0));
    return worst;
  }

  // max over conjugate pairs of |A(w) B(w_p - w) - B(w) A(w_p - w)|
  double symmetry_residual() const {
    if (is_flat()) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
      const std::size_t j = grid->conjugate_index(i);
      worst = std::max(worst, std::abs(A[i] * B[j] - B[i] * A[j]));
    }
    return worst;
  }

 private:
  cplx interpolate(const std::vector<cplx>& v, double omega) const {
    const double pos = (omega - grid->lowest()) / grid->step();
    const double last = static_cast<double>(grid->points - 1);
    if (pos < -1e-9 || pos > last + 1e-9)
      throw DomainError("frequency " + std::to_string(omega) + " GHz lies outside the amplitude grid");
    const double clamped = std::clamp(pos, 0.0, last);
    std::size_t i = static_cast<std::size_t>(clamped);
    if (i >= grid->points - 1) i = grid->points - 2;
    const double t = clamped - static_cast<double>(i);
    return v[i] * (1.0 - t) + v[i + 1] * t;
  }
};

namespace detail {

// sinh(g L)/g and cosh(g L) as functions of g^2, continuous through g^2 = 0.
inline void gain_functions(double g2, double L, double& sinh_over_g, double& cosh_gl) {
  const double x2 = g2 * L * L;
  if (std::abs(x2) < 1e-6) {
    sinh_over_g = L * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0)));
    cosh_gl = 1.0 + x2 / 2.0 * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0));
  } else if (g2 > 0.0) {
    const double g = std::sqrt(g2);
    sinh_over_g = std::sinh(g * L) / g;
    cosh_gl = std::cosh(g * L);
  } else {
    const double g = std::sqrt(-g2);
    sinh_over_g = std::sin(g * L) / g;
    cosh_gl = std::cos(g * L);
  }
}

}  // namespace detail

// Closed-form solution of the pair equations for constant coupling and
// mismatch, with g^2 = |kappa|^2 - (delta_k/2)^2.
inline AmplitudePair analytic_amplitudes(cplx kappa0, double delta_k0, double length) {
  const double g2 = std::norm(kappa0) - 0.25 * delta_k0 * delta_k0;
  double s = 0.0, c = 0.0;
  detail::gain_functions(g2, length, s, c);
  const cplx phase = std::polar(1.0, 0.5 * delta_k0 * length);
  const cplx i{0.0, 1.0};
  return AmplitudePair{phase * (c - i * (0.5 * delta_k0) * s), phase * (i * kappa0 * s)};
}

inline constexpr int kDefaultPropagationSteps = 256;

// Integrates db(w)/dz = i kappa e^{i dk z} b^dag(w_p - w) and its conjugate
// partner with classical RK4 from z = 0 (A = 1, B = 0) to z = L. Each
// conjugate pair is one 2x2 linear system; its rows are the coefficients of
// (a_vac(w), a_vac^dag(w_p - w)) in b(w) and b^dag(w_p - w).
inline SpectralAmplitudes propagate_envelopes(const CrystalProfile& profile, const FrequencyGrid& grid,
                                              int steps = kDefaultPropagationSteps) {
  grid.validate();
  profile.validate(grid);
  if (steps < 16) throw ConfigError("propagation needs at least 16 steps");

  SpectralAmplitudes out;
  out.grid = grid;
  out.A.assign(grid.points, cplx{});
  out.B.assign(grid.points, cplx{});

  const double h = profile.length_mm / steps;
  const cplx i{0.0, 1.0};
  using State = std::array<cplx, 4>;  // {row0: u0, u1; row1: v0, v1}

  for (std::size_t idx = 0; 2 * idx <= grid.points - 1; ++idx) {
    const cplx kappa = profile.kappa[idx];
    const double dk = profile.delta_k[idx];
    auto rhs = [&](double z, const State& y) {
      const cplx up = i * kappa * std::polar(1.0, dk * z);
      const cplx down = -i * std::conj(kappa) * std::polar(1.0, -dk * z);
      return State{up * y[2], up * y[3], down * y[0], down * y[1]};
    };
    auto axpy = [](const State& y, double a, const State& k) {
      return State{y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]};
    };

    State y{cplx{1.0}, cplx{}, cplx{}, cplx{1.0}};
    for (int s = 0; s < steps; ++s) {
      const double z = s * h;
      const State k1 = rhs(z, y);
      const State k2 = rhs(z + 0.5 * h, axpy(y, 0.5 * h, k1));
      const State k3 = rhs(z + 0.5 * h, axpy(y, 0.5 * h, k2));
      const State k4 = rhs(z + h, axpy(y, h, k3));
      for (std::size_t c = 0; c < 4; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }

    const std::size_t conj = grid.conjugate_index(idx);
    out.A[idx] = y[0];
    out.B[idx] = y[1];
    if (conj != idx) {
      out.A[conj] = std::conj(y[3]);
      out.B[conj] = std::conj(y[2]);
    }
  }

  const double unitarity = out.unitarity_residual();
  if (unitarity > 1e-6)
    throw ConvergenceError("RK4 unitarity deviation " + std::to_string(unitarity) +
                           " exceeds 1e-6; increase the number of steps");

  out.A0 = out.a_at(grid.center);
  out.B0 = out.b_at(grid.center);
  return out;
}

// Flat-band constants from a measured channel-2 singles rate (counts/s):
// |B0|^2 = 4 pi R2 / integral |H2|^2, |A0|^2 = 1 + |B0|^2, zero phases.
inline AmplitudePair amplitudes_from_rate(double r2_counts_per_s, const GaussianFilter& filter2) {
  if (!(r2_counts_per_s > 0.0)) throw DomainError("measured singles rate must be positive");
  if (!(filter2.amplitude > 0.0)) throw DomainError("channel-2 filter amplitude must be positive");
  const double r2_per_ns = r2_counts_per_s / kPerNsToPerS;
  const double b2 = 4.0 * kPi * r2_per_ns / filter2.intensity_integral();
  return AmplitudePair{cplx{std::sqrt(1.0 + b2), 0.0}, cplx{std::sqrt(b2), 0.0}};
}

}  // namespace modlab
