#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "modlab/error.hpp"
#include "modlab/fft.hpp"
#include "modlab/filter.hpp"
#include "modlab/modulation.hpp"
#include "modlab/quadrature.hpp"
#include "modlab/scenario.hpp"
#include "modlab/spdc.hpp"
#include "modlab/units.hpp"

namespace modlab {

// Coincidence rate sampled over Delta = beta (x1 + x2) - w_p. Rates in counts/s.
struct CorrelationTrace {
  std::vector<double> delta;  // GHz
  std::vector<double> paired;
  std::vector<double> accidental;
  std::vector<double> total;
  std::vector<int> n_index;
  double omega_m = 0.0;  // sideband spacing the trace was computed with
  double h2_fwhm = 0.0;  // FWHM of the sideband lineshape
  std::size_t truncated_samples = 0;  // samples whose sideband lies outside the coefficient support

  std::size_t size() const { return delta.size(); }
  bool empty() const { return delta.empty(); }

  void resize(std::size_t n) {
    delta.assign(n, 0.0);
    paired.assign(n, 0.0);
    accidental.assign(n, 0.0);
    total.assign(n, 0.0);
    n_index.assign(n, 0);
  }
};

// Uniform axis lo, lo + step, ..., up to hi inclusive (with rounding slack).
inline std::vector<double> make_axis(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ConfigError("axis step must be positive");
  if (!(hi >= lo)) throw ConfigError("axis bounds must be ordered");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> axis(count);
  for (std::size_t i = 0; i < count; ++i) axis[i] = lo + static_cast<double>(i) * step;
  return axis;
}

// n = floor(Delta / omega_m + 1/2); exact half-integers round up.
inline int sideband_index(double delta, double omega_m) {
  return static_cast<int>(std::floor(delta / omega_m + 0.5));
}

namespace detail {

template <class F>
void parallel_for(std::size_t n, const F& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, n / 16));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

inline void require_coverage(const SpectralAmplitudes& amps, double center, double reach) {
  if (!amps.covers(center - reach, center + reach))
    throw DomainError("filter passband with sideband shifts exceeds the amplitude grid");
}

}  // namespace detail

// R = (1/4pi) sum_k |q_k|^2 integral |B(w - k w_m)|^2 |H(w - beta x)|^2 dw.
inline double singles_rate(const SpectralAmplitudes& amps, const ModulatorSpectrum& mod, const GaussianFilter& filter) {
  const double center = filter.center();
  const double cut = filter.cutoff();
  const double peak = filter.amplitude * filter.amplitude;
  if (peak == 0.0) return 0.0;

  auto integrate = [&](auto&& b2_at) {
    const double b2max = b2_at(0.0);
    const double tol = 1e-12 * std::max(peak * std::max(b2max, 1e-300), 1e-300) * filter.intensity_sigma();
    return adaptive_simpson([&](double u) { return b2_at(u) * filter.intensity(u); }, -cut, cut, tol);
  };

  if (amps.is_flat()) {
    const double b2 = std::norm(amps.B0);
    if (b2 == 0.0) return 0.0;
    const double integral = integrate([b2](double) { return b2; });
    return kPerNsToPerS * integral * mod.total_power() / (4.0 * kPi);
  }

  detail::require_coverage(amps, center, cut + mod.K * mod.omega_m);
  double sum = 0.0;
  for (int k = -mod.K; k <= mod.K; ++k) {
    const double w = std::norm(mod.coeff(k));
    if (w == 0.0) continue;
    const double shift = center - k * mod.omega_m;
    sum += w * integrate([&](double u) { return std::norm(amps.b_at(shift + u)); });
  }
  return kPerNsToPerS * sum / (4.0 * kPi);
}

// Flat-band sideband model:
//   R_c(Delta) = R1 R2 T + c_n H2(n w_m - Delta),  c_n = |A0 B0 s_n|^2 / (8 pi).
inline CorrelationTrace coincidence_trace(const ExperimentScenario& sc, std::span<const double> delta_axis) {
  const NonlocalCoefficients s = compose_nonlocal(sc.mod1, sc.mod2);
  const bool exact = sc.mod1.exact_support() && sc.mod2.exact_support();
  const H2Profile h2 = h2_profile(sc.filter1, sc.filter2);
  const double ab2 = std::norm(sc.amplitudes.A0 * sc.amplitudes.B0);
  const double omega_m = sc.mod1.omega_m;

  const double r1 = singles_rate(sc.amplitudes, sc.mod1, sc.filter1);
  const double r2 = singles_rate(sc.amplitudes, sc.mod2, sc.filter2);
  const double accidental = r1 * r2 * sc.gate_ns / kPerNsToPerS;

  CorrelationTrace t;
  t.resize(delta_axis.size());
  t.omega_m = omega_m;
  t.h2_fwhm = h2.fwhm();
  for (std::size_t i = 0; i < delta_axis.size(); ++i) {
    const double d = delta_axis[i];
    const int n = sideband_index(d, omega_m);
    double paired = 0.0;
    if (s.in_support(n)) {
      const double cn = ab2 * std::norm(s.coeff(n)) / (8.0 * kPi);
      paired = kPerNsToPerS * cn * h2(n * omega_m - d);
    } else {
      if (!exact) ++t.truncated_samples;
    }
    t.delta[i] = d;
    t.n_index[i] = n;
    t.paired[i] = paired;
    t.accidental[i] = accidental;
    t.total[i] = paired + accidental;
  }
  return t;
}

// Delay grid for the pair kernels: an FFT of `points` samples (power of two,
// >= 4096) spanning `span` in tau. span = 0 picks 64 frequency samples per
// intensity FWHM of the narrower filter.
struct TauGrid {
  std::size_t points = 4096;
  double span = 0.0;
};

inline constexpr std::size_t kMinTauPoints = 4096;

// F_k(tau) on an ascending tau grid. The common factor exp(i beta x1 tau)
// is left out; it does not affect |sum_k c_k F_k|^2.
struct PairKernel {
  int k = 0;
  std::vector<double> tau;
  std::vector<cplx> values;

  double peak_magnitude() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }

  double edge_magnitude() const {
    if (values.empty()) return 0.0;
    return std::max(std::abs(values.front()), std::abs(values.back()));
  }

  double norm_integral() const {
    if (tau.size() < 2) return 0.0;
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * (tau[1] - tau[0]);
  }
};

inline constexpr double kKernelEdgeDecay = 1e-6;

namespace detail {

// Frequency and delay sampling shared by all kernels of one computation.
struct KernelLayout {
  std::size_t n = 0;
  double du = 0.0;    // GHz
  double dtau = 0.0;  // 1/GHz

  double u(std::size_t p) const {  // FFT input slot p holds u = p' du, p' in [-n/2, n/2)
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    auto pp = static_cast<std::ptrdiff_t>(p);
    if (pp >= half) pp -= static_cast<std::ptrdiff_t>(n);
    return static_cast<double>(pp) * du;
  }
};

inline KernelLayout make_layout(const ExperimentScenario& sc, const TauGrid& grid) {
  if (grid.points < kMinTauPoints || (grid.points & (grid.points - 1)) != 0)
    throw ConfigError("tau grid needs a power-of-two length >= 4096");
  const double narrow = std::min(sc.filter1.intensity_fwhm(), sc.filter2.intensity_fwhm());
  const double span = grid.span > 0.0 ? grid.span : 2.0 * kPi * 64.0 / narrow;
  KernelLayout l;
  l.n = grid.points;
  l.du = 2.0 * kPi / span;
  l.dtau = span / static_cast<double>(l.n);
  if (narrow / l.du < 32.0)
    throw ResolutionError("tau span too short: fewer than 32 frequency samples per filter FWHM");
  if (span < 10.0 / narrow) throw ResolutionError("tau span shorter than 10x the inverse filter width");
  const double window = 0.5 * static_cast<double>(l.n) * l.du;
  if (std::max(sc.filter1.cutoff(), sc.filter2.cutoff()) > window)
    throw ResolutionError("frequency window of the tau grid does not contain the filter passband");
  return l;
}

// Fills `in` with g_k(u) = (1/4pi) A(w - k w_m) B(w_p - w + k w_m) H1(u) H2(n w_m - Delta - u),
// w = beta x1 + u, and transforms it into F_k / du in `out`.
inline void kernel_samples(const ExperimentScenario& sc, const KernelLayout& l, double delta, int n, int k,
                           const FftPlan& plan, std::vector<cplx>& in, std::vector<cplx>& out) {
  const double x1c = sc.filter1.center();
  const double omega_m = sc.mod1.omega_m;
  const double c1 = sc.filter1.cutoff();
  const double c2 = sc.filter2.cutoff();
  const double h2_center = n * omega_m - delta;
  std::fill(in.begin(), in.end(), cplx{});
  for (std::size_t p = 0; p < l.n; ++p) {
    const double u = l.u(p);
    if (std::abs(u) > c1 || std::abs(h2_center - u) > c2) continue;
    const double w = x1c + u - k * omega_m;
    const cplx ab = sc.amplitudes.a_at(w) * sc.amplitudes.b_at(sc.pump_frequency - w);
    in[p] = ab * (sc.filter1.field(u) * sc.filter2.field(h2_center - u) / (4.0 * kPi));
  }
  plan.execute(in, out);
}

inline void check_decay(const std::vector<cplx>& f, std::size_t n, int k) {
  double peak = 0.0;
  for (const auto& v : f) peak = std::max(peak, std::abs(v));
  const std::size_t edge = n / 2;  // tau = -span/2 (== +span/2 periodically)
  const double e = std::max({std::abs(f[edge]), std::abs(f[edge - 1]), std::abs(f[edge + 1])});
  if (peak > 0.0 && e > kKernelEdgeDecay * peak)
    throw ResolutionError("pair kernel F_" + std::to_string(k) + " does not decay to 1e-6 of its peak within the tau grid");
}

}  // namespace detail

// Pair kernel F_k(tau) for one scan position.
inline PairKernel pair_kernel(const ExperimentScenario& sc, double delta, int k, const TauGrid& grid = {}) {
  const detail::KernelLayout l = detail::make_layout(sc, grid);
  const int n = sideband_index(delta, sc.mod1.omega_m);
  FftPlan plan(l.n, FftDirection::backward);
  std::vector<cplx> in(l.n), out(l.n);
  detail::kernel_samples(sc, l, delta, n, k, plan, in, out);

  PairKernel pk;
  pk.k = k;
  pk.tau.resize(l.n);
  pk.values.resize(l.n);
  const std::size_t half = l.n / 2;
  for (std::size_t j = 0; j < l.n; ++j) {
    const std::size_t q = (j + half) % l.n;  // j = 0 is tau = -span/2
    pk.tau[j] = (static_cast<double>(j) - static_cast<double>(half)) * l.dtau;
    pk.values[j] = out[q] * l.du;
  }
  return pk;
}

// Wick-expanded coincidence rate with the sampled A(w), B(w):
//   R_c = R1(x1) R2(x2) T + integral |sum_k q_k r_{n-k} F_k(tau)|^2 dtau.
// The tau integral runs over the whole (periodic) grid.
inline CorrelationTrace coincidence_full(const ExperimentScenario& sc, std::span<const double> delta_axis,
                                         const TauGrid& grid = {}) {
  const detail::KernelLayout l = detail::make_layout(sc, grid);
  const double omega_m = sc.mod1.omega_m;
  if (std::abs(sc.mod2.omega_m - omega_m) > 1e-12 * omega_m)
    throw ConfigError("modulators must share one drive frequency");
  const NonlocalCoefficients s = compose_nonlocal(sc.mod1, sc.mod2);
  const bool exact = sc.mod1.exact_support() && sc.mod2.exact_support();
  if (!sc.amplitudes.is_flat()) {
    const double reach = sc.filter1.cutoff() + sc.mod1.K * omega_m;
    detail::require_coverage(sc.amplitudes, sc.filter1.center(), reach);
    detail::require_coverage(sc.amplitudes, sc.pump_frequency - sc.filter1.center(), reach);
  }

  const double r1 = singles_rate(sc.amplitudes, sc.mod1, sc.filter1);
  const FftPlan plan(l.n, FftDirection::backward);

  CorrelationTrace t;
  t.resize(delta_axis.size());
  t.omega_m = omega_m;
  t.h2_fwhm = h2_profile(sc.filter1, sc.filter2).fwhm();
  std::vector<char> truncated(delta_axis.size(), 0);

  detail::parallel_for(delta_axis.size(), [&](std::size_t i) {
    const double d = delta_axis[i];
    const int n = sideband_index(d, omega_m);
    std::vector<cplx> in(l.n), out(l.n), acc(l.n, cplx{});
    bool any = false;
    for (int k = -sc.mod1.K; k <= sc.mod1.K; ++k) {
      const cplx ck = sc.mod1.coeff(k) * sc.mod2.coeff(n - k);
      if (ck == cplx{}) continue;
      detail::kernel_samples(sc, l, d, n, k, plan, in, out);
      detail::check_decay(out, l.n, k);
      for (std::size_t q = 0; q < l.n; ++q) acc[q] += ck * out[q];
      any = true;
    }
    double paired = 0.0;
    if (any) {
      double sum = 0.0;
      for (const auto& v : acc) sum += std::norm(v);
      paired = kPerNsToPerS * sum * l.du * l.du * l.dtau;
    }
    if (!exact && !s.in_support(n)) truncated[i] = 1;
    const double r2 = singles_rate(sc.amplitudes, sc.mod2, sc.filter2_at(d));
    t.delta[i] = d;
    t.n_index[i] = n;
    t.paired[i] = paired;
    t.accidental[i] = r1 * r2 * sc.gate_ns / kPerNsToPerS;
    t.total[i] = paired + t.accidental[i];
  });
  t.truncated_samples = static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
  return t;
}

struct SidebandArea {
  int n = 0;
  double area = 0.0;
};

// Paired area per sideband window [(n - 1/2) w_m, (n + 1/2) w_m), summing each
// sample with its trapezoid weight into the window of its own n_index.
inline std::vector<SidebandArea> sideband_areas(const CorrelationTrace& t) {
  if (t.size() < 2) throw ResolutionError("sideband areas need at least two samples");
  if (!(t.omega_m > 0.0) || !(t.h2_fwhm > 0.0)) throw ResolutionError("trace lacks sideband metadata");
  const double step = t.delta[1] - t.delta[0];
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs((t.delta[i] - t.delta[i - 1]) - step) > 1e-9 * std::abs(step))
      throw ResolutionError("sideband areas need a uniform Delta axis");
  if (!(step > 0.0) || step > 0.25 * t.h2_fwhm)
    throw ResolutionError("Delta axis too coarse for the sideband lineshape");
  const double sigma = t.h2_fwhm / std::sqrt(8.0 * kLn2);
  if (std::exp(-t.omega_m * t.omega_m / (2.0 * sigma * sigma)) >= 1e-6)
    throw ResolutionError("adjacent sidebands overlap by more than 1e-6 of the peak");

  std::map<int, double> areas;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = (i == 0 || i + 1 == t.size()) ? 0.5 * step : step;
    areas[t.n_index[i]] += w * t.paired[i];
  }
  std::vector<SidebandArea> out;
  out.reserve(areas.size());
  for (const auto& [n, a] : areas) out.push_back({n, a});
  return out;
}

inline double total_paired_area(const CorrelationTrace& t) {
  double s = 0.0;
  for (const auto& a : sideband_areas(t)) s += a.area;
  return s;
}

}  // namespace modlab
