#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

// J_n(x) from its power series, summed in long double.
inline double bessel_j(int n, double x) {
  const bool odd_neg = n < 0 && (-n) % 2 == 1;
  const int m = std::abs(n);
  const long double hx = 0.5L * x;
  long double term = 1.0L;
  for (int k = 1; k <= m; ++k) term *= hx / k;
  long double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -hx * hx / (static_cast<long double>(k) * (k + m));
    sum += term;
    if (std::abs(term) < 1e-30L * std::abs(sum) && k > static_cast<int>(std::abs(x))) break;
  }
  return static_cast<double>(odd_neg ? -sum : sum);
}

// c_k = (1/N) sum_j f_j exp(+2 pi i k j / N), summed term by term.
inline cplx dft_coefficient(const std::vector<cplx>& f, int k) {
  const double n = static_cast<double>(f.size());
  cplx s{};
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * std::polar(1.0, 2.0 * kPi * k * static_cast<double>(j) / n);
  return s / n;
}

// (f * g)(w) by a midpoint sum over [-half_width, half_width].
inline double convolve(const std::function<double(double)>& f, const std::function<double(double)>& g, double w,
                       double half_width, int samples = 40000) {
  const double h = 2.0 * half_width / samples;
  double s = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = -half_width + (i + 0.5) * h;
    s += f(u) * g(w - u);
  }
  return s * h;
}

// Full width at half maximum of an even, unimodal profile, by bisection on
// the right flank.
inline double fwhm_by_bisection(const std::function<double(double)>& p, double hi) {
  const double half = 0.5 * p(0.0);
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p(mid) > half ? lo : hi) = mid;
  }
  return lo + hi;
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
