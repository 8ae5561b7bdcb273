#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "modlab/spdc.hpp"
#include "oracles.hpp"

using namespace modlab;

namespace {

const double kPump = 563519.657894737;

// Independent closed form from the 2x2 transfer matrix written with
// matrix exponentials in the rotating frame: with c = cosh(gL), s = sinh(gL)/g.
AmplitudePair reference_amplitudes(double kappa, double dk, double L) {
  const double g2 = kappa * kappa - dk * dk / 4.0;
  std::complex<double> g = std::sqrt(std::complex<double>(g2));
  const std::complex<double> c = std::cosh(g * L);
  const std::complex<double> s = std::abs(g) < 1e-300 ? std::complex<double>(L) : std::sinh(g * L) / g;
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> ph = std::exp(i * (dk * L / 2.0));
  return {ph * (c - i * (dk / 2.0) * s), ph * i * kappa * s};
}

}  // namespace

TEST(Analytic, MatchesIndependentClosedForm) {
  for (double kappa : {0.0, 0.01, 0.05})
    for (double dk : {0.0, 0.01, 0.05, 0.2}) {
      const auto a = analytic_amplitudes(kappa, dk, 20.0);
      const auto r = reference_amplitudes(kappa, dk, 20.0);
      EXPECT_LT(std::abs(a.A0 - r.A0), 1e-12) << kappa << " " << dk;
      EXPECT_LT(std::abs(a.B0 - r.B0), 1e-12) << kappa << " " << dk;
      EXPECT_NEAR(std::norm(a.A0) - std::norm(a.B0), 1.0, 1e-12);
    }
}

TEST(Analytic, PhaseMatchedGain) {
  const auto a = analytic_amplitudes(0.05, 0.0, 20.0);
  EXPECT_NEAR(std::abs(a.A0), std::cosh(1.0), 1e-14);
  EXPECT_NEAR(std::abs(a.B0), std::sinh(1.0), 1e-14);
}

TEST(Analytic, ContinuousThroughZeroGain) {
  // g^2 = 0 exactly when dk = 2 kappa; values just either side must agree
  const double kappa = 0.03;
  const auto at = analytic_amplitudes(kappa, 2.0 * kappa, 20.0);
  const auto above = analytic_amplitudes(kappa, 2.0 * kappa * (1.0 + 1e-7), 20.0);
  const auto below = analytic_amplitudes(kappa, 2.0 * kappa * (1.0 - 1e-7), 20.0);
  EXPECT_LT(std::abs(at.B0 - above.B0), 1e-7);
  EXPECT_LT(std::abs(at.B0 - below.B0), 1e-7);
}

TEST(Grid, ConjugateSamples) {
  const auto g = FrequencyGrid::paired(kPump, 100.0, 11);
  for (std::size_t i = 0; i < g.points; ++i)
    EXPECT_NEAR(g.frequency(i) + g.frequency(g.conjugate_index(i)), kPump, 1e-9);
  EXPECT_NO_THROW(g.validate());
  FrequencyGrid off = g;
  off.center += 1.0;
  EXPECT_THROW(off.validate(), ConfigError);
}

TEST(Propagate, ZeroCouplingIsIdentity) {
  const auto g = FrequencyGrid::paired(kPump, 100.0, 21);
  const auto a = propagate_envelopes(CrystalProfile::uniform(g, 0.0, 0.3, 20.0), g);
  for (std::size_t i = 0; i < g.points; ++i) {
    EXPECT_NEAR(std::abs(a.A[i]), 1.0, 1e-14);
    EXPECT_EQ(a.B[i], cplx{});
  }
}

TEST(Propagate, ConstantProfileMatchesAnalytic) {
  const auto g = FrequencyGrid::paired(kPump, 50.0, 5);
  for (double dk : {0.0, 0.02, 0.2}) {
    const auto exact = analytic_amplitudes(0.05, dk, 20.0);
    const auto a = propagate_envelopes(CrystalProfile::uniform(g, 0.05, dk, 20.0), g, 256);
    for (std::size_t i = 0; i < g.points; ++i) {
      EXPECT_LT(std::abs(a.A[i] - exact.A0), 1e-10) << "dk=" << dk << " i=" << i;
      // the conjugate partner carries B(w_p - w) = B(w) for a symmetric profile
      EXPECT_LT(std::abs(a.B[i] - exact.B0), 1e-10) << "dk=" << dk << " i=" << i;
    }
  }
}

TEST(Propagate, FourthOrderConvergence) {
  const auto g = FrequencyGrid::paired(kPump, 10.0, 3);
  const auto exact = analytic_amplitudes(0.05, 0.2, 20.0);
  auto err = [&](int steps) {
    const auto a = propagate_envelopes(CrystalProfile::uniform(g, 0.05, 0.2, 20.0), g, steps);
    return std::abs(a.B[1] - exact.B0) + std::abs(a.A[1] - exact.A0);
  };
  EXPECT_GE(std::log2(err(16) / err(32)), 3.8);
  EXPECT_GE(std::log2(err(32) / err(64)), 3.8);
}

TEST(Propagate, RejectsAsymmetricProfile) {
  const auto g = FrequencyGrid::paired(kPump, 100.0, 11);
  auto p = CrystalProfile::uniform(g, 0.05, 0.0, 20.0);
  p.delta_k[0] = 0.1;
  EXPECT_THROW(propagate_envelopes(p, g), ConfigError);
  auto short_profile = CrystalProfile::uniform(g, 0.05, 0.0, 20.0);
  short_profile.kappa.pop_back();
  EXPECT_THROW(propagate_envelopes(short_profile, g), ConfigError);
}

TEST(Propagate, TooFewStepsIsConfigError) {
  const auto g = FrequencyGrid::paired(kPump, 10.0, 3);
  EXPECT_THROW(propagate_envelopes(CrystalProfile::uniform(g, 0.05, 0.0, 20.0), g, 8), ConfigError);
}

TEST(Propagate, UnderResolvedGainIsConvergenceError) {
  const auto g = FrequencyGrid::paired(kPump, 10.0, 3);
  EXPECT_THROW(propagate_envelopes(CrystalProfile::uniform(g, 1.0, 0.0, 20.0), g, 16), ConvergenceError);
}

TEST(PropagateProperty, UnitarityAndPairSymmetryOnRandomProfiles) {
  gen::for_all(21, 12, [](gen::Gen& g, int) {
    const std::size_t points = 2 * static_cast<std::size_t>(g.integer(5, 40)) + 1;
    const auto grid = FrequencyGrid::paired(kPump, g.uniform(100.0, 4000.0), points);
    CrystalProfile p = CrystalProfile::uniform(grid, 0.0, 0.0, g.uniform(5.0, 30.0));
    for (std::size_t i = 0; 2 * i < points; ++i) {
      const cplx k = std::polar(g.uniform(0.0, 0.06), g.phase());
      const double dk = g.uniform(-0.3, 0.3);
      p.kappa[i] = p.kappa[grid.conjugate_index(i)] = k;
      p.delta_k[i] = p.delta_k[grid.conjugate_index(i)] = dk;
    }
    const auto a = propagate_envelopes(p, grid, 256);
    EXPECT_LT(a.unitarity_residual(), 1e-9);
    EXPECT_LT(a.symmetry_residual(), 1e-9);
  });
}

TEST(Amplitudes, FlatAndInterpolated) {
  const auto f = SpectralAmplitudes::flat(cplx{1.2}, cplx{0.5});
  EXPECT_TRUE(f.is_flat());
  EXPECT_EQ(f.b_at(1e6), cplx{0.5});

  const auto g = FrequencyGrid::paired(kPump, 100.0, 11);
  const auto a = propagate_envelopes(CrystalProfile::quadratic_mismatch(g, 0.02, 1e-4, 20.0), g);
  EXPECT_LT(std::abs(a.b_at(g.frequency(3)) - a.B[3]), 1e-15);
  const cplx mid = a.b_at(0.5 * (g.frequency(3) + g.frequency(4)));
  EXPECT_LT(std::abs(mid - 0.5 * (a.B[3] + a.B[4])), 1e-15);
  EXPECT_THROW(a.b_at(g.highest() + 1.0), DomainError);
  EXPECT_LT(std::abs(a.B0 - a.b_at(g.center)), 1e-15);
}

TEST(Amplitudes, FromMeasuredRate) {
  GaussianFilter f2{8.5, std::sqrt(5.59e-4)};
  const auto ab = amplitudes_from_rate(1.15e4, f2);
  const double b2 = 4.0 * oracle::kPi * 1.15e-5 / f2.intensity_integral();
  EXPECT_NEAR(std::norm(ab.B0), b2, 1e-15);
  EXPECT_NEAR(std::norm(ab.A0) - std::norm(ab.B0), 1.0, 1e-14);
  EXPECT_THROW(amplitudes_from_rate(0.0, f2), DomainError);
}
