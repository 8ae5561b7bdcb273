#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "modlab/bessel.hpp"
#include "modlab/modulation.hpp"
#include "oracles.hpp"

using namespace modlab;

TEST(Bessel, SquaresAtDepth1p5MatchSeriesOracle) {
  const double expected[] = {0.26197, 0.31129, 0.05386, 0.0037166};
  for (int n = 0; n < 4; ++n) {
    const double j = bessel_j(n, 1.5);
    EXPECT_NEAR(j * j, expected[n], 5e-6) << "n=" << n;
    EXPECT_NEAR(j, oracle::bessel_j(n, 1.5), 1e-14) << "n=" << n;
  }
}

TEST(Bessel, SquaresAtDepth3MatchSeriesOracle) {
  const double expected[] = {0.067627, 0.114961, 0.236285, 0.095520, 0.017433};
  for (int n = 0; n < 5; ++n) EXPECT_NEAR(std::pow(bessel_j(n, 3.0), 2), expected[n], 2e-6) << "n=" << n;
}

TEST(Bessel, RecurrenceAgreesWithSeriesOverRange) {
  gen::for_all(11, 200, [](gen::Gen& g, int) {
    const double x = g.uniform(0.0, 8.0);
    const int n = g.integer(-25, 25);
    EXPECT_NEAR(bessel_j(n, x), oracle::bessel_j(n, x), 1e-13) << "n=" << n << " x=" << x;
  });
}

TEST(Bessel, NegativeOrdersAndArguments) {
  EXPECT_NEAR(bessel_j(-3, 1.2), -bessel_j(3, 1.2), 1e-15);
  EXPECT_NEAR(bessel_j(3, -1.2), -bessel_j(3, 1.2), 1e-15);
  EXPECT_NEAR(bessel_j(2, -1.2), bessel_j(2, 1.2), 1e-15);
  EXPECT_DOUBLE_EQ(bessel_j(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(bessel_j(4, 0.0), 0.0);
}

TEST(Sinusoidal, ZeroDepthIsIdentity) {
  const auto m = sinusoidal_coeffs(0.0, 0.7, 30.0);
  EXPECT_EQ(m.coeff(0), cplx(1.0));
  for (int k = 1; k <= m.K + 2; ++k) {
    EXPECT_EQ(m.coeff(k), cplx{});
    EXPECT_EQ(m.coeff(-k), cplx{});
  }
}

TEST(Sinusoidal, Depth1p5Powers) {
  const auto m = sinusoidal_coeffs(1.5, 0.0, 30.0);
  const double expected[] = {0.26197, 0.31129, 0.05386, 0.003717};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(std::norm(m.coeff(k)), expected[k], 5e-6);
    EXPECT_NEAR(std::norm(m.coeff(-k)), expected[k], 5e-6);
  }
  EXPECT_NEAR(m.total_power(), 1.0, 1e-12);
}

TEST(Sinusoidal, TailBelowTolerance) {
  for (double d : {0.1, 1.5, 3.0, 10.0}) {
    const auto m = sinusoidal_coeffs(d, 0.0, 30.0);
    EXPECT_LT(m.tail_power(), 1e-24 * m.total_power()) << "depth " << d;
    EXPECT_LE(m.K, static_cast<int>(d) + 25);
  }
}

TEST(Sinusoidal, RejectsBadArguments) {
  EXPECT_THROW(sinusoidal_coeffs(1.0, 0.0, 30.0, 0.0), ConfigError);
  EXPECT_THROW(sinusoidal_coeffs(1.0, 0.0, 0.0), ConfigError);
}

TEST(SinusoidalProperty, ParsevalForRandomDrives) {
  gen::for_all(3, 100, [](gen::Gen& g, int) {
    const auto m = sinusoidal_coeffs(g.uniform(0.0, 6.0), g.phase(), 30.0);
    EXPECT_NEAR(m.total_power(), 1.0, 1e-10);
  });
}

TEST(SinusoidalProperty, CoefficientsAreJacobiAnger) {
  // exp[i d cos(theta + phi)] = sum_k q_k exp(-i k theta), checked at random theta
  gen::for_all(4, 60, [](gen::Gen& g, int) {
    const double d = g.depth(), phi = g.phase(), theta = g.phase();
    const auto m = sinusoidal_coeffs(d, phi, 30.0);
    cplx sum{};
    for (int k = -m.K; k <= m.K; ++k) sum += m.coeff(k) * std::polar(1.0, -k * theta);
    EXPECT_NEAR(std::abs(sum - std::polar(1.0, d * std::cos(theta + phi))), 0.0, 1e-12);
  });
}

TEST(Waveform, ConstantPhaseIsIdentity) {
  const std::vector<double> phi(128, 0.0);
  const auto m = coeffs_from_waveform(phi, 30.0);
  EXPECT_NEAR(std::abs(m.coeff(0) - cplx(1.0)), 0.0, 1e-15);
  for (int k = 1; k <= m.K; ++k) EXPECT_LT(std::abs(m.coeff(k)) + std::abs(m.coeff(-k)), 1e-15);
}

TEST(Waveform, CosineMatchesSinusoidal) {
  std::vector<double> phi(512);
  for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = 1.5 * std::cos(2.0 * oracle::kPi * j / 512.0);
  const auto w = coeffs_from_waveform(phi, 30.0);
  const auto b = sinusoidal_coeffs(1.5, 0.0, 30.0);
  for (int k = -30; k <= 30; ++k) EXPECT_LT(std::abs(w.coeff(k) - b.coeff(k)), 1e-10) << "k=" << k;
}

TEST(Waveform, SquareWaveHasOddHarmonics) {
  // Phi in {0, pi}: exp(i Phi) = +1 on the first half period, -1 on the second.
  const std::size_t n = 1024;
  std::vector<double> phi(n);
  for (std::size_t j = 0; j < n; ++j) phi[j] = j < n / 2 ? 0.0 : oracle::kPi;
  const auto m = coeffs_from_waveform(phi, 30.0);
  // With the sampled edge at t = 0 the DFT of a +-1 square wave is
  // c_k = 4/(N (1 - exp(2 pi i k / N))) for odd k and 0 for even k != 0.
  std::vector<cplx> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = std::polar(1.0, phi[j]);
  for (int k = -15; k <= 15; ++k) {
    const cplx expect = oracle::dft_coefficient(f, k);
    EXPECT_LT(std::abs(m.coeff(k) - expect), 1e-12) << "k=" << k;
    if (k % 2 == 0) {
      EXPECT_LT(std::abs(m.coeff(k)), 1e-12);
    } else {
      // continuum limit |c_k| = 2 / (pi |k|)
      EXPECT_NEAR(std::abs(m.coeff(k)), 2.0 / (oracle::kPi * std::abs(k)), 2e-3 / std::abs(k));
    }
  }
}

TEST(Waveform, TooFewSamplesIsConfigError) {
  EXPECT_THROW(coeffs_from_waveform(std::vector<double>(63, 0.0), 30.0), ConfigError);
  EXPECT_NO_THROW(coeffs_from_waveform(std::vector<double>(64, 0.0), 30.0));
}

TEST(Waveform, ReadsTwoColumnText) {
  std::ostringstream text;
  text << "# time phase\n";
  for (int j = 0; j < 64; ++j) text << j / 64.0 << ' ' << 0.5 * j << "\n";
  std::istringstream in(text.str());
  const auto phi = read_waveform(in);
  ASSERT_EQ(phi.size(), 64u);
  EXPECT_DOUBLE_EQ(phi[3], 1.5);
}

TEST(Waveform, RejectsNonUniformTimes) {
  std::istringstream in("0 0\n0.3 0\n0.5 0\n0.75 0\n");
  EXPECT_THROW(read_waveform(in), ConfigError);
  std::istringstream bad("0 0 0\n");
  EXPECT_THROW(read_waveform(bad), ParseError);
}

TEST(WaveformProperty, DftOracleAgreement) {
  gen::for_all(5, 30, [](gen::Gen& g, int) {
    const std::size_t n = static_cast<std::size_t>(64 << g.integer(0, 3));
    const auto phi = g.smooth_waveform(n);
    const auto m = coeffs_from_waveform(phi, 30.0);
    std::vector<cplx> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = std::polar(1.0, phi[j]);
    for (int k = -m.K; k <= m.K; ++k) EXPECT_LT(std::abs(m.coeff(k) - oracle::dft_coefficient(f, k)), 1e-12);
    EXPECT_NEAR(m.total_power(), 1.0, 1e-10);
  });
}

TEST(Compose, IdentityLeavesSpectrumUnchanged) {
  const auto r = sinusoidal_coeffs(1.5, 0.4, 30.0);
  const auto s = compose_nonlocal(identity_modulator(30.0), r);
  for (int n = -s.N; n <= s.N; ++n) EXPECT_LT(std::abs(s.coeff(n) - r.coeff(n)), 1e-15);
}

TEST(Compose, SamePhaseDoublesDepth) {
  const auto s = compose_nonlocal(sinusoidal_coeffs(1.5, 0.0, 30.0), sinusoidal_coeffs(1.5, 0.0, 30.0));
  const double expected[] = {0.06763, 0.11496, 0.23628, 0.09552, 0.017433};
  for (int n = 0; n < 5; ++n) {
    EXPECT_NEAR(std::norm(s.coeff(n)), expected[n], 5e-6);
    EXPECT_NEAR(std::norm(s.coeff(n)), std::pow(oracle::bessel_j(n, 3.0), 2), 1e-13);
  }
  EXPECT_NEAR(s.total_power(), 1.0, 1e-9);
}

TEST(Compose, OppositePhaseCancels) {
  const auto s = compose_nonlocal(sinusoidal_coeffs(1.5, 0.0, 30.0), sinusoidal_coeffs(1.5, oracle::kPi, 30.0));
  EXPECT_NEAR(std::abs(s.coeff(0) - cplx(1.0)), 0.0, 1e-12);
  for (int n = 1; n <= s.N; ++n) {
    EXPECT_LT(std::abs(s.coeff(n)), 1e-12);
    EXPECT_LT(std::abs(s.coeff(-n)), 1e-12);
  }
}

TEST(Compose, MismatchedDriveIsConfigError) {
  EXPECT_THROW(compose_nonlocal(sinusoidal_coeffs(1.0, 0.0, 30.0), sinusoidal_coeffs(1.0, 0.0, 31.0)), ConfigError);
}

TEST(ComposeProperty, AdditionTheoremOnGrid) {
  for (double d1 : {0.5, 1.0, 1.5, 2.5})
    for (double d2 : {0.5, 1.0, 1.5, 2.5})
      for (double rel : {0.0, oracle::kPi}) {
        const auto s = compose_nonlocal(sinusoidal_coeffs(d1, 0.0, 30.0), sinusoidal_coeffs(d2, rel, 30.0));
        const double sum = rel == 0.0 ? d1 + d2 : d1 - d2;
        for (int n = -s.N; n <= s.N; ++n)
          EXPECT_NEAR(std::abs(s.coeff(n)), std::abs(oracle::bessel_j(n, sum)), 1e-9)
              << d1 << " " << d2 << " " << rel << " n=" << n;
      }
}

TEST(ComposeProperty, CommonDelayOnlyRephases) {
  // Delaying both drives by the same time multiplies s_n by exp(-i n phi),
  // so |s_n|^2 depends on the phases only through their difference.
  gen::for_all(6, 60, [](gen::Gen& g, int) {
    const double d1 = g.depth(), d2 = g.depth(), p1 = g.phase(), p2 = g.phase(), shift = g.phase();
    const auto a = compose_nonlocal(sinusoidal_coeffs(d1, p1, 30.0), sinusoidal_coeffs(d2, p2, 30.0));
    const auto b =
        compose_nonlocal(sinusoidal_coeffs(d1, p1 + shift, 30.0), sinusoidal_coeffs(d2, p2 + shift, 30.0));
    for (int n = -a.N; n <= a.N; ++n) {
      EXPECT_NEAR(std::norm(a.coeff(n)), std::norm(b.coeff(n)), 1e-12);
      EXPECT_LT(std::abs(b.coeff(n) - a.coeff(n) * std::polar(1.0, -n * shift)), 1e-12);
    }
  });
}

TEST(ComposeProperty, RelativePhaseIsObservable) {
  const auto a = compose_nonlocal(sinusoidal_coeffs(1.5, 0.0, 30.0), sinusoidal_coeffs(1.5, 0.0, 30.0));
  const auto b = compose_nonlocal(sinusoidal_coeffs(1.5, 0.5, 30.0), sinusoidal_coeffs(1.5, -0.5, 30.0));
  EXPECT_GT(std::abs(std::norm(a.coeff(0)) - std::norm(b.coeff(0))), 1e-3);
}

TEST(ComposeProperty, UnimodularParseval) {
  gen::for_all(7, 40, [](gen::Gen& g, int) {
    const auto q = g.coin() ? sinusoidal_coeffs(g.depth(), g.phase(), 30.0)
                            : coeffs_from_waveform(g.smooth_waveform(256), 30.0);
    const auto r = sinusoidal_coeffs(g.depth(), g.phase(), 30.0);
    EXPECT_NEAR(compose_nonlocal(q, r).total_power(), 1.0, 1e-9);
  });
}

TEST(ComposeProperty, ComposedWaveformsMatchProductDft) {
  gen::for_all(8, 25, [](gen::Gen& g, int) {
    const std::size_t n = 512;
    const auto p1 = g.smooth_waveform(n), p2 = g.smooth_waveform(n);
    const auto s = compose_nonlocal(coeffs_from_waveform(p1, 30.0), coeffs_from_waveform(p2, 30.0));
    std::vector<cplx> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = std::polar(1.0, p1[j] + p2[j]);
    for (int k = -40; k <= 40; ++k)
      EXPECT_NEAR(std::norm(s.coeff(k)), std::norm(oracle::dft_coefficient(f, k)), 1e-9) << "k=" << k;
  });
}
