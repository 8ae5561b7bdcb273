#pragma once

#include <cmath>

namespace modlab {

namespace detail {

template <class F>
double simpson_refine(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                      double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance abs_tol.
// The interval is pre-split into `segments` panels so that narrow features are
// not missed by the first coarse estimate.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol, int segments = 16,
                        int max_depth = 40) {
  if (b == a) return 0.0;
  const double w = (b - a) / segments;
  double total = 0.0;
  double x0 = a;
  double f0 = f(x0);
  for (int s = 0; s < segments; ++s) {
    const double x1 = (s + 1 == segments) ? b : a + (s + 1) * w;
    const double xm = 0.5 * (x0 + x1);
    const double fm = f(xm);
    const double f1 = f(x1);
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += detail::simpson_refine(f, x0, x1, f0, fm, f1, whole, abs_tol / segments, max_depth);
    x0 = x1;
    f0 = f1;
  }
  return total;
}

}  // namespace modlab
