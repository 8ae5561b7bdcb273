#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace modlab {

// J_0(x) .. J_nmax(x) by Miller's downward recurrence, normalized with the
// identity J_0 + 2 * sum_{k>=1} J_{2k} = 1. Accurate to a few ulps for the
// moderate arguments used for phase modulators (|x| up to a few tens).
inline std::vector<double> bessel_j_sequence(double x, int nmax) {
  nmax = std::max(nmax, 0);
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double ax = std::abs(x);

  // Start well above both the highest order and the turning point |x|.
  const int top = std::max(nmax, static_cast<int>(ax));
  int start = top + 20 + static_cast<int>(std::sqrt(60.0 * (top + 1)));
  start += start % 2;  // even, so the normalization sum picks the right parity

  constexpr double kBig = 1e200;
  constexpr double kSmall = 1e-200;
  double next = 0.0;   // J_{k+1}
  double curr = 1e-30; // J_k, arbitrary seed
  double even_sum = 0.0;
  std::vector<double> tmp(static_cast<std::size_t>(start) + 1, 0.0);
  tmp[static_cast<std::size_t>(start)] = curr;
  for (int k = start; k > 0; --k) {
    const double prev = (2.0 * k / ax) * curr - next;
    next = curr;
    curr = prev;
    tmp[static_cast<std::size_t>(k - 1)] = curr;
    if ((k - 1) % 2 == 0 && k - 1 > 0) even_sum += curr;
    if (std::abs(curr) > kBig) {
      for (int j = k - 1; j <= start; ++j) tmp[static_cast<std::size_t>(j)] *= kSmall;
      curr *= kSmall;
      next *= kSmall;
      even_sum *= kSmall;
    }
  }
  const double norm = tmp[0] + 2.0 * even_sum;
  for (int n = 0; n <= nmax; ++n) {
    double v = tmp[static_cast<std::size_t>(n)] / norm;
    if (x < 0.0 && n % 2 == 1) v = -v;
    out[static_cast<std::size_t>(n)] = v;
  }
  return out;
}

// Integer-order J_n(x), any sign of n.
inline double bessel_j(int n, double x) {
  const int an = std::abs(n);
  const double v = bessel_j_sequence(x, an)[static_cast<std::size_t>(an)];
  return (n < 0 && an % 2 == 1) ? -v : v;
}

// Direct power series sum_m (-1)^m (x/2)^{2m+n} / (m! (m+n)!). Kept separate
// from the recurrence so one can check the other; fine for |x| <~ 20.
inline double bessel_j_series(int n, double x) {
  const int an = std::abs(n);
  const double half = 0.5 * x;
  double term = 1.0;
  for (int j = 1; j <= an; ++j) term *= half / j;
  double sum = term;
  const double h2 = half * half;
  for (int m = 1; m < 500; ++m) {
    term *= -h2 / (static_cast<double>(m) * (m + an));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) && m > half) break;
  }
  return (n < 0 && an % 2 == 1) ? -sum : sum;
}

}  // namespace modlab
