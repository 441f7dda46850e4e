#include <gtest/gtest.h>

#include <ctn/neumann.hpp>
#include <ctn/yamabe.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace ctn;

namespace {

double agm(double x) { return double(oracle::agm_f21(oracle::hp(x))); }

} // namespace

TEST(F21Half, Examples) {
  EXPECT_EQ(f21_half(0.0), 1.0);
  const double g = boost::math::tgamma(0.25);
  EXPECT_NEAR(f21_half(0.5), g * g / (2 * std::pow(pi, 1.5)), 1e-14);
  EXPECT_NEAR(f21_half(0.5), 1.180341, 1e-6);
  EXPECT_NEAR(f21_half(0.9), agm(0.9), 1e-12);
  EXPECT_EQ(f21_half_eval(0.3).method, HypergeomMethod::series);
  EXPECT_EQ(f21_half_eval(0.7).method, HypergeomMethod::log_transform);
  EXPECT_THROW(f21_half(1.0), domain_error);
  EXPECT_THROW(f21_half(-0.1), domain_error);
}

TEST(F21Half, MatchesAgmOracle) {
  for (int i = 1; i <= 19; ++i) {
    double x = 0.05 * i;
    EXPECT_NEAR(f21_half(x), agm(x), 1e-12 * agm(x)) << x;
  }
  for (double x : {0.99, 0.999, 0.999999}) EXPECT_NEAR(f21_half(x), agm(x), 1e-12 * agm(x)) << x;
}

TEST(F21Half, BranchesAgreeAtHalf) {
  EXPECT_NEAR(detail::f21_series(0.5, 0.5, 1, 0.5), detail::f21_half_log(0.5), 1e-13);
  EXPECT_NEAR(f21_half(std::nextafter(0.5, 1.0)), f21_half(0.5), 1e-13);
}

TEST(F21Half, IncreasingConvexAndAtLeastOne) {
  double prev = 0, prevd = 0;
  for (int i = 0; i < 999; ++i) {
    double x = i / 1000.0;
    double f = f21_half(x);
    EXPECT_GE(f, 1.0);
    if (i) EXPECT_GT(f, prev);
    if (i > 1) EXPECT_GT(f - prev, prevd);
    if (i) prevd = f - prev;
    prev = f;
  }
}

TEST(F21Half, DerivativesMatchDifferences) {
  for (double x : {0.1, 0.4, 0.7}) {
    const double h = 1e-5;
    EXPECT_NEAR(f21_half_d1(x), (f21_half(x + h) - f21_half(x - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(f21_half_d2(x), (f21_half_d1(x + h) - f21_half_d1(x - h)) / (2 * h), 1e-7);
  }
}

TEST(F21Half, LogarithmicDivergence) {
  // value / log(1/(1-x)) settles to a positive constant; log(16/(1-x)) / pi is the leading term
  std::vector<double> ratios;
  for (double e : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) ratios.push_back(f21_half(1 - e) / std::log(1 / e));
  for (std::size_t i = 2; i < ratios.size(); ++i)
    EXPECT_LT(std::abs(ratios[i] - ratios[i - 1]), std::abs(ratios[i - 1] - ratios[i - 2]));
  EXPECT_GT(ratios.back(), 0);
  // next term of the expansion is O(e log(1/e)); e is taken as 1 - x so it is exact
  for (double x : {1 - 1e-4, 1 - 1e-6, 1 - 1e-8, 1 - 1e-10}) {
    double e = 1 - x;
    EXPECT_LT(std::abs(pi * f21_half(x) - std::log(16 / e)), e * std::log(16 / e)) << e;
  }
}

TEST(YamabeFactor, OneOnSigma) {
  const double s = 1 / std::numbers::sqrt2;
  EXPECT_EQ(yamabe_factor(SpherePoint{s, s}), 1.0);
  EXPECT_EQ(yamabe_factor(SpherePoint{std::polar(s, 0.3), std::polar(s, -1.2)}), 1.0);
  EXPECT_NEAR(yamabe_factor(chart(0, 0.7, -0.4)), 1.0, 1e-14);
  EXPECT_EQ(yamabe_factor_collar(0), 1.0);
  EXPECT_EQ(yamabe_radial(pi / 2), 1.0);
}

TEST(YamabeFactor, DependsOnlyOnLevelAndExceedsOneInside) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> U(-pi, pi), V(-pi / 2, pi / 2);
  for (double t : {0.005, 0.02, collar_max}) {
    double ref = yamabe_factor_collar(t);
    EXPECT_GT(ref, 1.0);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(yamabe_factor(chart(t, U(rng), V(rng))), ref, 1e-13);
    EXPECT_NEAR(yamabe_radial(collar_to_polar(t, 0, 0).r), ref, 1e-13);
  }
}

TEST(YamabeFactor, ExplicitModulus) {
  const double b = std::sqrt(0.9), a = std::sqrt(0.1);
  EXPECT_NEAR(yamabe_factor(SpherePoint{a, b}), f21_half(0.9) / f21_half(0.5), 1e-14);
  EXPECT_THROW(yamabe_factor(SpherePoint{0, 1}), domain_error);
  EXPECT_THROW(yamabe_factor(SpherePoint{0, 0}), domain_error);
  EXPECT_THROW(yamabe_radial(0), domain_error);
}

TEST(OdeResidual, AnalyticBranch) {
  EXPECT_LT(std::abs(ode_residual(-0.5)), 1e-12);
  EXPECT_LT(std::abs(ode_residual(0.0)), 1e-12);
  for (int i = 0; i < 50; ++i) {
    double x = -0.98 + 0.98 * i / 49.0;
    EXPECT_LT(std::abs(ode_residual(x)), 1e-12) << x;
  }
  EXPECT_THROW(ode_residual(1.0), domain_error);
  EXPECT_THROW(ode_residual(-1.0), domain_error);
}

TEST(OdeResidual, DifferenceBranchIsSecondOrder) {
  std::vector<double> r;
  for (double h : {4e-2, 2e-2, 1e-2}) r.push_back(std::abs(ode_residual(0.6, h)));
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_NEAR(std::log2(r[i - 1] / r[i]), 2.0, 0.2);
  EXPECT_THROW(ode_residual(0.99, 0.05), domain_error);
}

TEST(PolarResidual, RadialSolution) {
  EXPECT_LT(std::abs(radial_residual(pi / 2)), 1e-10);
  EXPECT_LT(std::abs(radial_residual(3 * pi / 4)), 1e-10);
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(pi / 2 - 0.1 + (pi / 2 + 0.05) * i / 100.0);
  EXPECT_LT(polar_L_residual(grid), 1e-10);
  EXPECT_THROW(polar_L_residual({pi}), domain_error);
}

TEST(PolarResidual, FullOperatorReducesToRadial) {
  // for a radial field the full L is -2 (w'' + cot r w' - w/4)
  auto w = [](double r) { return std::exp(0.3 * r) + r * r; };
  auto lifted = [&](double t, double, double) { return w(pi / 2 - std::numbers::sqrt2 * t); };
  for (double t : {0.01, 0.02, 0.03}) {
    double r = pi / 2 - std::numbers::sqrt2 * t;
    double w1 = 0.3 * std::exp(0.3 * r) + 2 * r, w2 = 0.09 * std::exp(0.3 * r) + 2;
    double exact = -2 * (w2 + std::cos(r) / std::sin(r) * w1 - w(r) / 4);
    EXPECT_NEAR(L_residual(lifted, t, TorusPoint{0.2, 0.1}, 1e-3), exact, 1e-6);
  }
  auto u = [](double t, double, double) { return yamabe_factor_collar(t); };
  for (double t : {0.01, 0.02, 0.03})
    EXPECT_NEAR(L_residual(u, t, TorusPoint{-0.5, 0.3}, 1e-3), -2 * radial_residual(pi / 2 - std::numbers::sqrt2 * t), 1e-6);
}
