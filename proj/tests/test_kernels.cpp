#include <gtest/gtest.h>

#include <ctn/kernels.hpp>

#include <random>

#include "oracles.hpp"

using namespace ctn;
using oracle::hp;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct Sampler {
  std::mt19937 rng;
  explicit Sampler(unsigned s) : rng(s) {}
  double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
};

} // namespace

TEST(Chart, EqualModuliOnTheTorus) {
  auto p = chart(0, 0.4, -0.3);
  EXPECT_NEAR(std::abs(p.z1), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(p.z2), 1 / std::sqrt(2.0), 1e-15);
  auto q = chart(0.02, 0.4, -0.3);
  EXPECT_LT(std::abs(q.z1), std::abs(q.z2));
  EXPECT_NEAR(std::norm(q.z1) + std::norm(q.z2), 1, 1e-15);
}

TEST(Chart, InverseRoundTrip) {
  Sampler s(1);
  for (int i = 0; i < 200; ++i) {
    CollarPoint c(s.uni(0, collar_max), reduce(s.uni(-pi, pi), s.uni(-pi / 2, pi / 2)));
    auto back = inverse_chart(chart(c));
    EXPECT_NEAR(back.t, c.t, 1e-13);
    auto d = reduce(back.p.u - c.p.u, back.p.v - c.p.v);
    EXPECT_LT(std::abs(d.u) + std::abs(d.v), 1e-12);
  }
  EXPECT_THROW(CollarPoint(0.1, TorusPoint{}), domain_error);
}

TEST(Chart, LatticeShiftsGiveTheSamePoint) {
  auto a = chart(0.01, 0.3, 0.2), b = chart(0.01, 0.3 + pi, 0.2 + pi);
  EXPECT_LT(std::abs(a.z1 - b.z1) + std::abs(a.z2 - b.z2), 1e-14);
}

TEST(Green, MatchesCollarKernel) {
  // G(Phi(t,u,v), Phi(0,0,0)) = k(t/sqrt2, u, v) / (8 pi)
  Sampler s(2);
  for (int i = 0; i < 20; ++i) {
    double t = s.uni(0.001, collar_max), u = s.uni(-1, 1), v = s.uni(-1, 1);
    double g = green(chart(t, u, v), chart(0, 0, 0));
    double k = eval_k(t / std::sqrt(2.0), u, v);
    EXPECT_NEAR(g * 8 * pi / k, 1.0, 1e-12);
  }
  EXPECT_THROW(green(chart(0, 0, 0), chart(0, 0, 0)), domain_error);
}

TEST(CollarKernel, Examples) {
  EXPECT_DOUBLE_EQ(eval_k(pi / 2, 0.0, 0.0), 1.0);
  EXPECT_NEAR(eval_k(0.0, pi, 0.0), 0.5, 1e-15);
  double ref = static_cast<double>(oracle::k(hp("0.1"), hp("0.2"), hp("0.3")));
  EXPECT_NEAR(eval_k(0.1, 0.2, 0.3), ref, 1e-15 * ref);
  EXPECT_THROW(eval_k(0.0, 0.0, 0.0), domain_error);
}

TEST(CollarKernel, MatchesExtendedPrecisionNearTheSingularity) {
  Sampler s(3);
  for (int i = 0; i < 200; ++i) {
    double t = s.uni(1e-4, 0.03), u = s.uni(-0.05, 0.05), v = s.uni(-0.01, 0.01);
    double ref = static_cast<double>(oracle::k(hp(t), hp(u), hp(v)));
    EXPECT_LT(std::abs(eval_k(t, u, v) - ref) / ref, 1e-12);
  }
}

TEST(CollarKernel, Periodic) {
  Sampler s(4);
  for (int i = 0; i < 100; ++i) {
    double t = s.uni(0.001, 0.03), u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    EXPECT_LT(rel(eval_k(t, u + pi, v + pi), eval_k(t, u, v)), 1e-14);
  }
}

TEST(CollarKernel, DerivativeExamples) {
  EXPECT_NEAR(eval_dkdt(0.0, pi / 2, pi / 2), 1.0, 1e-15);
  Sampler s(5);
  for (int i = 0; i < 100; ++i) {
    double u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    EXPECT_LT(rel(eval_dkdt(0.0, u, v), eval_K(u, v)), 1e-14);
  }
}

TEST(CollarKernel, DerivativeMatchesFiniteDifferences) {
  const double t = 0.2, u = 0.5, v = 0.1;
  double exact = eval_dkdt(t, u, v);
  double prev = 0;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    double fd = (eval_k(t + h, u, v) - eval_k(t - h, u, v)) / (2 * h);
    double err = std::abs(fd - exact);
    if (prev > 0) EXPECT_NEAR(std::log2(prev / err), 2.0, 0.1);
    prev = err;
  }
}

TEST(CollarKernel, GrowthBoundOnTheCollar) {
  // k (t + ||(u,v)||)^2 stays bounded; record the empirical constant
  Sampler s(6);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    double t = s.uni(0, collar_max), u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    if (t == 0 && u == 0 && v == 0) continue;
    double n = t + torus_norm(u, v);
    worst = std::max(worst, eval_k(t, u, v) * n * n);
  }
  RecordProperty("growth_constant", std::to_string(worst));
  EXPECT_LT(worst, 10.0);
}

TEST(BoundaryKernel, Examples) {
  EXPECT_NEAR(eval_K(pi / 2, pi / 2), 1.0, 1e-15);
  EXPECT_NEAR(eval_K(-pi / 2, pi / 2), -1.0, 1e-15);
  double ref = static_cast<double>(oracle::K(oracle::hp_pi() / 4, oracle::hp_pi() / 8));
  EXPECT_NEAR(eval_K(pi / 4, pi / 8), ref, 1e-14 * std::abs(ref));
  double ref0 = static_cast<double>(oracle::K0(oracle::hp_pi() / 4, oracle::hp_pi() / 8));
  EXPECT_NEAR(eval_K0(pi / 4, pi / 8), ref0, 1e-14 * ref0);
  EXPECT_THROW(eval_K(0.0, 0.0), domain_error);
  EXPECT_THROW(eval_K0(0.0, 0.0), domain_error);
}

TEST(BoundaryKernel, Parities) {
  Sampler s(7);
  for (int i = 0; i < 100; ++i) {
    double u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    EXPECT_EQ(eval_K(-u, v), -eval_K(u, v));
    EXPECT_EQ(eval_K(u, -v), -eval_K(u, v));
    EXPECT_NEAR(eval_K0(-u, v), eval_K0(u, v), 1e-15 * eval_K0(u, v));
    EXPECT_NEAR(eval_K0(u, -v), eval_K0(u, v), 1e-15 * eval_K0(u, v));
  }
}

TEST(BoundaryKernel, PartialsMatchFiniteDifferences) {
  Sampler s(8);
  for (int i = 0; i < 20; ++i) {
    double u = s.uni(0.2, 2.5), v = s.uni(0.1, 1.4);
    double eu = 0, ev = 0, euu = 0;
    for (double h : {4e-3, 2e-3}) {
      double fu = (eval_K(u + h, v) - eval_K(u - h, v)) / (2 * h);
      double fv = (eval_K(u, v + h) - eval_K(u, v - h)) / (2 * h);
      double fuu = (eval_K(u + h, v) - 2 * eval_K(u, v) + eval_K(u - h, v)) / (h * h);
      double nu = std::abs(fu - eval_dK_du(u, v)), nv = std::abs(fv - eval_dK_dv(u, v)),
             nuu = std::abs(fuu - eval_d2K_du2(u, v));
      if (eu > 0) {
        EXPECT_GT(std::log2(eu / nu), 1.8);
        EXPECT_GT(std::log2(ev / nv), 1.8);
        EXPECT_GT(std::log2(euu / nuu), 1.8);
      }
      eu = nu;
      ev = nv;
      euu = nuu;
    }
  }
}

TEST(BoundaryKernel, LowerBoundForD4) {
  Sampler s(9);
  for (int i = 0; i < 100000; ++i) {
    double u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    double u2 = u * u, v2 = v * v;
    double d04 = u2 * u2 / 4 + v2;
    double bracket = u2 * u2 * u2 / 24 + u2 * v2 / 2 + 2 * u2 * u2 * u2 * u2 / 40320 + 2 * v2 * v2 / 24;
    EXPECT_GE(eval_d4(u, v), d04 - bracket - 1e-15);
  }
}

TEST(BoundaryKernel, NormEquivalenceOnTheUnitShell) {
  Sampler s(10);
  double lo = 1e300, hi = 0;
  for (int i = 0; i < 100000; ++i) {
    // a point with |t| + |u| + |v|^{1/2} = 1
    double a = s.uni(0, 1), b = s.uni(0, 1 - a), c = 1 - a - b;
    double t = (s.uni(0, 1) < 0.5 ? -a : a), u = (s.uni(0, 1) < 0.5 ? -b : b), v = (s.uni(0, 1) < 0.5 ? -1 : 1) * c * c;
    double r = std::pow((t * t + u * u) / 2, 2) + std::pow(v - t * u, 2);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  RecordProperty("ratio_interval", std::to_string(lo) + "," + std::to_string(hi));
  EXPECT_GT(lo, 1e-4);
  EXPECT_LT(hi, 1.0);
}

TEST(BoundaryKernel, NumeratorMajorants) {
  Sampler s(11);
  for (int i = 0; i < 100000; ++i) {
    double u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    auto A = approximants(u, v);
    double au = std::abs(u), av = std::abs(v);
    double bu = std::abs(A.n0u) + 1451 * std::pow(au, 6) * av / 3072 + u * u * av * av * av / 2 + std::pow(v, 4) / 3;
    double bv = std::abs(A.n0v) + 683 * std::pow(au, 7) / 15360 + au * au * au * v * v + 7 * au * av * av * av / 6;
    double buu = std::abs(A.n0uu) + 1195 * std::pow(au, 9) * av / 2048 + std::pow(au, 5) * av * av * av / 8 +
                 5 * au * au * au * std::pow(v, 4) / 2 + 15 * au * std::pow(av, 5) / 4;
    ASSERT_LE(std::abs(numer_u(u, v)), bu + 1e-15) << u << "," << v;
    ASSERT_LE(std::abs(numer_v(u, v)), bv + 1e-15) << u << "," << v;
    ASSERT_LE(std::abs(numer_uu(u, v)), buu + 1e-15) << u << "," << v;
  }
}

TEST(InteriorGradientKernel, Symmetries) {
  Sampler s(12);
  for (int i = 0; i < 200; ++i) {
    double t = s.uni(0.001, collar_max), u = s.uni(-pi, pi), v = s.uni(-pi / 2, pi / 2);
    auto a = eval_Kt(t, u, v), b = eval_Kt(t, -u, -v), c = eval_Kt(t, -u, v);
    EXPECT_NEAR(b.real(), -a.real(), 1e-12 * std::abs(a));
    EXPECT_NEAR(c.imag(), -a.imag(), 1e-12 * std::abs(a));
  }
  EXPECT_EQ(std::abs(eval_Kt(0.01, 0.0, 0.3)), 0.0);
  auto ref = oracle::Kt(hp("0.01"), hp("0.3"), hp("0.2"));
  auto z = eval_Kt(0.01, 0.3, 0.2);
  EXPECT_NEAR(z.real(), static_cast<double>(ref.first), 1e-13 * std::abs(z));
  EXPECT_NEAR(z.imag(), static_cast<double>(ref.second), 1e-13 * std::abs(z));
}

TEST(Approximants, Examples) {
  auto a = approximants(1.0, 0.5);
  EXPECT_NEAR(a.K, std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(approximants(1.0, 1.0).n0uu, -45.0 / 8);
  EXPECT_THROW(approximants(0.0, 0.0), domain_error);
}

TEST(Approximants, AnisotropicHomogeneity) {
  Sampler s(13);
  for (int i = 0; i < 100; ++i) {
    double u = s.uni(-2, 2), v = s.uni(-1, 1), l = s.uni(0.2, 3);
    auto a = approximants(u, v), b = approximants(l * u, l * l * v);
    EXPECT_NEAR(b.K, a.K / (l * l * l), 1e-12 * std::abs(a.K / (l * l * l)) + 1e-300);
    EXPECT_NEAR(b.Ku, a.Ku * std::pow(l, -4), 1e-12 * std::abs(a.Ku) * std::pow(l, -4) + 1e-300);
    EXPECT_NEAR(b.Kv, a.Kv * std::pow(l, -5), 1e-12 * std::abs(a.Kv) * std::pow(l, -5) + 1e-300);
    EXPECT_NEAR(b.Kuu, a.Kuu * std::pow(l, -5), 1e-12 * std::abs(a.Kuu) * std::pow(l, -5) + 1e-300);
  }
  auto a = approximants(0.3, 0.2), b = approximants(0.6, 0.8);
  EXPECT_NEAR(b.K, a.K / 8, 1e-14);
}

TEST(Approximants, PartialsMatchFiniteDifferences) {
  const double u = 0.7, v = 0.3, h = 1e-4;
  auto a = approximants(u, v);
  EXPECT_NEAR((approximants(u + h, v).K - approximants(u - h, v).K) / (2 * h), a.Ku, 1e-6);
  EXPECT_NEAR((approximants(u, v + h).K - approximants(u, v - h).K) / (2 * h), a.Kv, 1e-6);
  EXPECT_NEAR((approximants(u + h, v).K - 2 * a.K + approximants(u - h, v).K) / (h * h), a.Kuu, 1e-4);
}

TEST(Majorants, ClosedFormsOfE0) {
  double e02 = std::sqrt((68935125533.0 + 1312025 * std::sqrt(1102101.0)) / 55105058) / 75;
  double e01 = std::sqrt((137909641801.0 + 2625550 * std::sqrt(1102731.0)) / 110273101) / 75;
  EXPECT_NEAR(majorant_constants(2).e0, e02, 1e-10);
  EXPECT_NEAR(majorant_constants(1).e0, e01, 1e-10);
}

TEST(Majorants, E1DecreasingAndPositive) {
  double prev = 2;
  for (double a = 0.25; a <= 5; a += 0.25) {
    auto mc = majorant_constants(a);
    EXPECT_GT(mc.e1, 0);
    EXPECT_LT(mc.e1, 1);
    EXPECT_LT(mc.e1, prev);
    EXPECT_GT(mc.c(6), 0);
    prev = mc.e1;
  }
  EXPECT_THROW(majorant_constants(0), domain_error);
  EXPECT_THROW(majorant_constants(5.5), domain_error);
}

TEST(Majorants, VanishOnTheUAxis) { EXPECT_EQ(majorants(2.0, 0.3, 0.0).eps0, 0.0); }

TEST(Majorants, DominateTheKernelNearTheOrigin) {
  for (double a : {1.0, 2.0}) {
    auto mc = majorant_constants(a);
    Sampler s(14 + static_cast<unsigned>(a));
    for (int i = 0; i < 10000; ++i) {
      // ||(u/a, v)|| <= 2/5
      double u = s.uni(-a * mc.b, a * mc.b), v = s.uni(-mc.b * mc.b, mc.b * mc.b);
      if (u == 0 && v == 0) continue;
      auto A = approximants(u, v);
      auto m = majorants(mc, u, v);
      double slack = 1e-12;
      ASSERT_LE(std::abs(eval_K(u, v)), (std::abs(A.K) + m.eps0) * (1 + slack)) << a << " " << u << "," << v;
      ASSERT_LE(std::abs(eval_dK_du(u, v)), (std::abs(A.Ku) + m.epsU) * (1 + slack)) << a << " " << u << "," << v;
      ASSERT_LE(std::abs(eval_dK_dv(u, v)), (std::abs(A.Kv) + m.epsV) * (1 + slack)) << a << " " << u << "," << v;
      ASSERT_LE(std::abs(eval_d2K_du2(u, v)), (std::abs(A.Kuu) + m.epsUU) * (1 + slack)) << a << " " << u << "," << v;
    }
  }
}
