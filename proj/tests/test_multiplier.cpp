#include <gtest/gtest.h>

#include <ctn/multiplier.hpp>
#include <ctn/quadrature.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace ctn;

namespace {

const SymbolTable& khat16() {
  static const SymbolTable t = build_Khat(16);
  return t;
}

const SymbolTable& k0hat16() {
  static const SymbolTable t = build_K0hat(16);
  return t;
}

QuadratureSpec tight() {
  QuadratureSpec q;
  q.abs_tol = 1e-9;
  return q;
}

} // namespace

TEST(SymbolTable, RejectsBadCutoffAndMissingEntries) {
  EXPECT_THROW(SymbolTable("Khat", 0, 0), domain_error);
  EXPECT_THROW(khat16().value(1, 2), table_error);
  EXPECT_THROW(khat16().value(17, 1), table_error);
}

TEST(BuildKhat, AgreesWithAdaptiveQuadrature) {
  const auto& T = khat16();
  for (auto [m, n] : {std::pair{1, 1}, {2, 2}, {3, 1}, {1, 5}, {7, 3}, {12, 16}, {15, 15}}) {
    auto r = khat(m, n, tight());
    EXPECT_NEAR(T.value(m, n), r.value, 1e-7) << m << "," << n;
    EXPECT_LT(T.error(m, n), 1e-6);
  }
}

TEST(BuildKhat, Symmetries) {
  const auto& T = khat16();
  EXPECT_EQ(T.value(2, 0), 0.0);
  EXPECT_EQ(T.value(0, 6), 0.0);
  T.for_each([&](int m, int n, double v, double) {
    EXPECT_EQ(T.value(-m, -n), v);
    EXPECT_EQ(T.value(-m, n), -v);
  });
}

TEST(BuildKhat, Cutoff64BelowFourPi) {
  auto T = build_Khat(64);
  auto e = T.max_abs();
  EXPECT_LT(std::abs(e.value), 4 * pi);
  EXPECT_LT(T.max_err(), 1e-6);
  EXPECT_THROW(build_Khat(0), domain_error);
}

TEST(BuildK0hat, PositiveEvenAndDecaying) {
  const auto& T = k0hat16();
  EXPECT_GT(T.value(0, 0), 0);
  EXPECT_NEAR(T.value(0, 0), k0hat(0, 0, tight()).value, 1e-7);
  EXPECT_NEAR(T.value(3, 5), k0hat(3, 5, tight()).value, 1e-7);
  T.for_each([&](int m, int n, double v, double) {
    EXPECT_EQ(T.value(-m, n), v);
    EXPECT_EQ(T.value(m, -n), v);
  });
  // |K0^| (1 + |m| + |n|^(1/2)) does not grow: the outer shell of the M = 64 table stays below the inner sup
  auto T64 = build_K0hat(64);
  double inner = 0, outer = 0;
  T64.for_each([&](int m, int n, double v, double) {
    double w = std::abs(v) * (1 + std::abs(m) + std::sqrt(std::abs(n)));
    double& slot = std::max(std::abs(m), std::abs(n)) <= 32 ? inner : outer;
    slot = std::max(slot, w);
  });
  EXPECT_LE(outer, 1.1 * inner);
}

TEST(BuildKthat, AgreesWithAdaptiveAndRejectsBadLevel) {
  for (double t : {0.03, 0.2}) {
    auto T = build_kthat(t, 8);
    for (auto [m, n] : {std::pair{0, 0}, {1, 1}, {-1, 1}, {2, 4}, {5, -3}}) {
      EXPECT_NEAR(T.value(m, n), kthat_entry(t, m, n, tight()).value, 1e-7) << t << " " << m << "," << n;
    }
    auto D = build_dkdthat(t, 8);
    for (auto [m, n] : {std::pair{0, 0}, {1, 1}, {3, -1}})
      EXPECT_NEAR(D.value(m, n), dkdthat_entry(t, m, n, tight()).value, 1e-6) << t << " " << m << "," << n;
  }
  EXPECT_THROW(build_kthat(0.0, 8), domain_error);
  EXPECT_THROW(build_kthat(1.0, 8), domain_error);
  EXPECT_THROW(build_dkdthat(-0.1, 8), domain_error);
}

TEST(BuildKthat, KtSymbolUniformlyBounded) {
  std::vector<double> sups;
  for (double t : {0.03, 0.01, 0.003}) {
    auto T = build_Kthat(t, 16);
    EXPECT_NEAR(T.value(3, 1), Kthat_entry(t, 3, 1, tight()).value, 1e-6);
    sups.push_back(std::abs(T.max_abs().value));
  }
  for (double s : sups) EXPECT_LT(s, 1.5 * sups.front());
  EXPECT_THROW(build_Kthat(0.1, 8), domain_error);
}

TEST(NeumannSymbol, Examples) {
  const auto& T = khat16();
  auto sig = neumann_symbol(T);
  EXPECT_EQ(sig(2, 0), -0.5);
  EXPECT_NEAR(sig(1, 1), -0.5 + khat(1, 1, tight()).value / (8 * pi), 1e-9);
  T.for_each([&](int m, int n, double, double) {
    EXPECT_GT(sig(m, n), -1);
    EXPECT_LT(sig(m, n), 0);
  });
  EXPECT_THROW(neumann_symbol(k0hat16()), table_error);
}

TEST(InvertNeumann, ExamplesAndRoundTrip) {
  const auto& T = khat16();
  auto sig = neumann_symbol(T);
  Spectrum zero(8);
  invert_neumann(zero, T).for_each([](int, int, cplx z) { EXPECT_EQ(z, cplx(0)); });

  Spectrum one(4);
  one(1, 1) = 1;
  auto f = invert_neumann(one, T);
  EXPECT_NEAR(f(1, 1).real(), 1 / sig(1, 1), 1e-15);

  auto h = oracle::random_real_spectrum(16, 99);
  auto back = apply_neumann(invert_neumann(h, T), T);
  double num = 0, den = 0;
  h.for_each([&](int m, int n, cplx z) {
    num += std::norm(z - back(m, n));
    den += std::norm(z);
  });
  EXPECT_LT(std::sqrt(num / den), 1e-12);

  Spectrum wide(20);
  wide(18, 2) = 1;
  EXPECT_THROW(invert_neumann(wide, T), table_error);
}

TEST(DtnSymbol, Examples) {
  auto nu = dtn_symbol(khat16(), k0hat16());
  const auto& K0 = k0hat16();
  EXPECT_NEAR(nu(0, 0), -4 * pi / (std::numbers::sqrt2 * K0.value(0, 0)), 1e-12);
  K0.for_each([&](int m, int n, double v, double) {
    if (v > 0) EXPECT_LT(nu(m, n), 0);
    EXPECT_EQ(nu(m, n), nu(-m, -n));
  });
  SymbolTable K0z = K0;
  K0z.set(1, 1, 0.0, 0.0);
  auto bad = dtn_symbol(khat16(), K0z);
  EXPECT_THROW(bad(1, 1), table_error);
}

TEST(MultiplierRoute, MatchesPvOracle) {
  const auto& T = khat16();
  // band-limited test functions given both spectrally and pointwise
  std::vector<Spectrum> specs{oracle::random_real_spectrum(3, 1, 0.3), oracle::random_real_spectrum(4, 2, 0.5),
                              oracle::random_real_spectrum(2, 3)};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-pi, pi), V(-pi / 2, pi / 2);
  QuadratureSpec q;
  q.abs_tol = 1e-8;
  for (const auto& s : specs) {
    Spectrum Ns(s.band());
    Ns.for_each_mut([&](int m, int n, cplx& z) { z = s(m, n) * T.value(m, n) / (8 * pi); });
    auto F = [&](double u, double v) { return synthesize(s, u, v).real(); };
    for (int i = 0; i < 20; ++i) {
      TorusPoint p{U(rng), V(rng)};
      auto r = pv_apply_N(F, p, q);
      double spectral = synthesize(Ns, p.u, p.v).real();
      double coef = 0;
      s.for_each([&](int, int, cplx z) { coef += std::abs(z); });
      // table error bound times the coefficient l1 norm over 2 pi^2 (8 pi)
      double tol = r.err_est + T.max_err() * coef / (two_pi_sq * 8 * pi) + 1e-12;
      EXPECT_NEAR(r.value, spectral, tol);
    }
  }
}
