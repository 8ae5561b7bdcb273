#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modlab/correlator.hpp"
#include "modlab/error.hpp"
#include "modlab/scenario.hpp"

namespace modlab {

// Recorded in output metadata so synthetic data sets can be regenerated.
inline constexpr std::string_view kRngAlgorithm = "std::mt19937_64+std::poisson_distribution";

// Independent Poisson counts with mean rate * dwell for every trace sample.
inline std::vector<double> synthesize_counts(const CorrelationTrace& trace, double dwell_s, std::uint64_t seed) {
  if (!(dwell_s > 0.0)) throw DomainError("dwell time must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> counts(trace.size(), 0.0);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double mean = trace.total[i] * dwell_s;
    if (mean > 0.0) {
      std::poisson_distribution<long long> pd(mean);
      counts[i] = static_cast<double>(pd(rng));
    }
  }
  return counts;
}

struct CountData {
  std::vector<double> delta;   // GHz
  std::vector<double> counts;  // per sample, accumulated over dwell_s
  double dwell_s = 20.0;
};

// alpha1_sq and alpha2_sq are effective scales: the channel-2 singles rate is
// held at its measured value, so |B0| follows alpha2_sq through
// |B0|^2 = 4 pi R2 / integral |H2|^2.
struct FitResult {
  double alpha1_sq = 0.0;
  double alpha2_sq = 0.0;
  double delta_offset = 0.0;  // GHz; model evaluated at Delta - offset
  double residual_rms = 0.0;  // counts
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // sum of squared residuals at the start and after each accepted step
};

class FitError : public Error {
 public:
  FitError(const std::string& what, FitResult best) : Error(what), best_(best) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

// Counts predicted by the flat-band sideband model as a function of
// (alpha1^2, alpha2^2, offset), with the channel-2 singles rate fixed:
//   model = dwell * [ a1 kr P(D) + (a1/a2) (kr^2 P(D) + R2^2 T I1/I2) ],  D = Delta - offset
// where kr = 4 pi R2 / I2 (I = unit-amplitude intensity integrals, R2 per ns)
// and P(D) = |s_n|^2 h(n w_m - D) / (8 pi) with h the unit-amplitude H2 profile.
class SidebandFitModel {
 public:
  explicit SidebandFitModel(const ExperimentScenario& sc, double dwell_s)
      : s_(compose_nonlocal(sc.mod1, sc.mod2)), omega_m_(sc.mod1.omega_m), gate_ns_(sc.gate_ns), dwell_(dwell_s) {
    GaussianFilter f1 = sc.filter1, f2 = sc.filter2;
    f1.amplitude = 1.0;
    f2.amplitude = 1.0;
    h_ = h2_profile(f1, f2);
    i1_ = f1.intensity_integral();
    i2_ = f2.intensity_integral();
    r2_ = singles_rate(sc.amplitudes, sc.mod2, sc.filter2) / kPerNsToPerS;
    kr_ = 4.0 * kPi * r2_ / i2_;
    floor_ = r2_ * r2_ * gate_ns_ * i1_ / i2_;
  }

  double measured_r2_per_s() const { return r2_ * kPerNsToPerS; }

  // Per-ns shape factor P and its derivative with respect to D.
  void shape(double d, double& p, double& dp) const {
    const int n = sideband_index(d, omega_m_);
    if (!s_.in_support(n)) {
      p = dp = 0.0;
      return;
    }
    const double c = std::norm(s_.coeff(n)) / (8.0 * kPi);
    p = c * h_(n * omega_m_ - d);
    dp = -c * h_.derivative(n * omega_m_ - d);
  }

  // Basis functions of the model in (u, v) = (a1, a1/a2), in counts.
  void basis(double d, double& f_u, double& f_v) const {
    double p = 0.0, dp = 0.0;
    shape(d, p, dp);
    const double scale = dwell_ * kPerNsToPerS;
    f_u = scale * kr_ * p;
    f_v = scale * (kr_ * kr_ * p + floor_);
  }

  double value(double a1, double a2, double offset, double delta) const {
    double fu = 0.0, fv = 0.0;
    basis(delta - offset, fu, fv);
    return a1 * fu + (a1 / a2) * fv;
  }

  // Value and gradient with respect to (a1, a2, offset).
  double value_and_gradient(double a1, double a2, double offset, double delta, Eigen::Vector3d& g) const {
    double p = 0.0, dp = 0.0;
    shape(delta - offset, p, dp);
    const double scale = dwell_ * kPerNsToPerS;
    const double fu = scale * kr_ * p;
    const double fv = scale * (kr_ * kr_ * p + floor_);
    const double dfu = scale * kr_ * dp;
    const double dfv = scale * kr_ * kr_ * dp;
    g(0) = fu + fv / a2;
    g(1) = -a1 * fv / (a2 * a2);
    g(2) = -(a1 * dfu + (a1 / a2) * dfv);
    return a1 * fu + (a1 / a2) * fv;
  }

 private:
  NonlocalCoefficients s_;
  H2Profile h_;
  double omega_m_, gate_ns_, dwell_;
  double i1_ = 0.0, i2_ = 0.0, r2_ = 0.0, kr_ = 0.0, floor_ = 0.0;
};

namespace detail {

inline double fit_objective(const SidebandFitModel& m, const CountData& data, double a1, double a2, double off) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.delta.size(); ++i) {
    const double r = m.value(a1, a2, off, data.delta[i]) - data.counts[i];
    s += r * r;
  }
  return s;
}

// For a fixed offset the model is linear in (u, v) = (a1, a1/a2).
inline bool linear_scales(const SidebandFitModel& m, const CountData& data, double off, double& u, double& v) {
  double suu = 0, suv = 0, svv = 0, su = 0, sv = 0;
  for (std::size_t i = 0; i < data.delta.size(); ++i) {
    double fu = 0, fv = 0;
    m.basis(data.delta[i] - off, fu, fv);
    suu += fu * fu;
    suv += fu * fv;
    svv += fv * fv;
    su += fu * data.counts[i];
    sv += fv * data.counts[i];
  }
  const double det = suu * svv - suv * suv;
  if (!(std::abs(det) > 1e-300)) return false;
  u = (su * svv - sv * suv) / det;
  v = (sv * suu - su * suv) / det;
  return u > 0.0 && v > 0.0;
}

}  // namespace detail

inline constexpr int kMaxFitIterations = 500;

// Least-squares fit of (alpha1^2, alpha2^2, horizontal offset) to counts,
// holding modulation depths, filter widths and w_m at their configured values.
// Coarse scan over the offset (solving the linear scales at each point), then
// Gauss-Newton with backtracking; |offset| stays within w_m / 2.
inline FitResult fit_scale(const CountData& data, const ExperimentScenario& sc) {
  const std::size_t n = data.delta.size();
  if (n < 10) throw DomainError("fit needs at least 10 data points");
  if (data.counts.size() != n) throw DomainError("fit data columns differ in length");
  for (double c : data.counts)
    if (!(c >= 0.0)) throw DomainError("fit data must be nonnegative");
  if (!(data.dwell_s > 0.0)) throw DomainError("dwell time must be positive");

  const SidebandFitModel model(sc, data.dwell_s);
  const double bound = 0.5 * sc.mod1.omega_m;

  // Coarse initialization.
  FitResult best;
  double best_obj = std::numeric_limits<double>::infinity();
  constexpr int kCoarse = 120;
  for (int j = 0; j <= kCoarse; ++j) {
    const double off = -bound + 2.0 * bound * j / kCoarse;
    double u = 0, v = 0;
    if (!detail::linear_scales(model, data, off, u, v)) continue;
    const double obj = detail::fit_objective(model, data, u, u / v, off);
    if (obj < best_obj) {
      best_obj = obj;
      best.alpha1_sq = u;
      best.alpha2_sq = u / v;
      best.delta_offset = off;
    }
  }
  if (!std::isfinite(best_obj)) throw FitError("no admissible starting point for the fit", best);

  Eigen::Vector3d theta(best.alpha1_sq, best.alpha2_sq, best.delta_offset);
  double obj = best_obj;
  std::vector<double> history{obj};
  double data_scale = 0.0;
  for (double c : data.counts) data_scale += c * c;

  auto gradient = [&](const Eigen::Vector3d& th, Eigen::MatrixXd& jac, Eigen::VectorXd& res) {
    jac.resize(static_cast<Eigen::Index>(n), 3);
    res.resize(static_cast<Eigen::Index>(n));
    Eigen::Vector3d g;
    for (std::size_t i = 0; i < n; ++i) {
      const double val = model.value_and_gradient(th(0), th(1), th(2), data.delta[i], g);
      res(static_cast<Eigen::Index>(i)) = val - data.counts[i];
      jac.row(static_cast<Eigen::Index>(i)) = g.transpose();
    }
    // Parameter-scaled gradient so the criterion does not depend on units.
    return (jac.transpose() * res).cwiseProduct(Eigen::Vector3d(th(0), th(1), bound)).norm();
  };

  Eigen::MatrixXd jac;
  Eigen::VectorXd res;
  const double grad0 = gradient(theta, jac, res);
  auto finish = [&](int it, bool ok) {
    FitResult r;
    r.alpha1_sq = theta(0);
    r.alpha2_sq = theta(1);
    r.delta_offset = theta(2);
    r.residual_rms = std::sqrt(obj / static_cast<double>(n));
    r.iterations = it;
    r.converged = ok;
    r.objective_history = history;
    return r;
  };
  if (grad0 == 0.0 || obj <= 1e-30 * data_scale) return finish(0, true);

  for (int it = 1; it <= kMaxFitIterations; ++it) {
    const double gnorm = gradient(theta, jac, res);
    if (gnorm < 1e-8 * grad0) return finish(it - 1, true);

    // Column scaling keeps the QR well conditioned across parameter magnitudes.
    const Eigen::Vector3d colscale = jac.colwise().norm().transpose().cwiseMax(1e-300);
    const Eigen::MatrixXd js = jac * colscale.cwiseInverse().asDiagonal();
    const Eigen::Vector3d step = (js.colPivHouseholderQr().solve(-res)).cwiseQuotient(colscale);

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      Eigen::Vector3d trial = theta + t * step;
      trial(2) = std::clamp(trial(2), -bound, bound);
      if (!(trial(0) > 0.0) || !(trial(1) > 0.0)) continue;
      const double trial_obj = detail::fit_objective(model, data, trial(0), trial(1), trial(2));
      if (trial_obj < obj) {
        const bool stalled = (trial - theta).cwiseAbs().cwiseQuotient(
                                 Eigen::Vector3d(theta(0), theta(1), bound)).maxCoeff() < 1e-15;
        theta = trial;
        obj = trial_obj;
        history.push_back(obj);
        accepted = true;
        if (stalled) return finish(it, true);
        break;
      }
    }
    // No decrease along the Gauss-Newton direction. If the linear model
    // promises less than the objective can resolve, the point is stationary.
    if (!accepted) {
      const double rel_step = step.cwiseAbs().cwiseQuotient(Eigen::Vector3d(theta(0), theta(1), bound)).maxCoeff();
      const double predicted = (jac * step).squaredNorm();  // decrease the linear model promises
      if (rel_step < 1e-9 || predicted <= 64.0 * std::numeric_limits<double>::epsilon() * obj ||
          obj <= 1e-30 * data_scale)
        return finish(it, true);
      throw FitError("line search failed to decrease the objective", finish(it, false));
    }
  }
  throw FitError("fit did not converge within 500 iterations", finish(kMaxFitIterations, false));
}

// Model counts for given fit parameters at the data positions.
inline std::vector<double> fit_model_counts(const ExperimentScenario& sc, const FitResult& fit,
                                            std::span<const double> delta, double dwell_s) {
  const SidebandFitModel model(sc, dwell_s);
  std::vector<double> out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i)
    out[i] = model.value(fit.alpha1_sq, fit.alpha2_sq, fit.delta_offset, delta[i]);
  return out;
}

}  // namespace modlab
