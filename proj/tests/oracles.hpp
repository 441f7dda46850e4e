#ifndef CTN_TESTS_ORACLES_HPP
#define CTN_TESTS_ORACLES_HPP

// Independent reference computations used only by the tests.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <ctn/torus.hpp>

namespace oracle {

using hp = boost::multiprecision::cpp_bin_float_50;

inline hp hp_pi() { return boost::math::constants::pi<hp>(); }

// closed forms written directly, no half-angle products
inline hp k(hp t, hp u, hp v) {
  hp A = cos(v) - cos(t) * cos(u), B = sin(v) - sin(t) * sin(u);
  return 1 / sqrt(A * A + B * B);
}

inline hp K(hp u, hp v) {
  hp A = cos(u) - cos(v), s = sin(v);
  hp d4 = A * A + s * s;
  return sin(u) * sin(v) / pow(d4, hp(1.5));
}

inline hp K0(hp u, hp v) {
  hp A = cos(u) - cos(v), s = sin(v);
  return 1 / sqrt(A * A + s * s);
}

inline std::pair<hp, hp> Kt(hp t, hp u, hp v) {
  hp A = cos(v) - cos(t) * cos(u);
  hp gp = A * A + pow(sin(v) - sin(t) * sin(u), 2), gm = A * A + pow(sin(v) + sin(t) * sin(u), 2);
  hp w = 1 / pow(gp, hp(1.5)) + 1 / pow(gm, hp(1.5));
  return {sin(u) * A * w, -sin(u) * sin(v) * w};
}

/// 2F1(1/2,1/2;1;x) = 1 / AGM(1, sqrt(1-x)).
inline hp agm_f21(hp x) {
  hp a = 1, b = sqrt(1 - x);
  for (int i = 0; i < 100; ++i) {
    hp an = (a + b) / 2;
    b = sqrt(a * b);
    a = an;
  }
  return 1 / a;
}

/// 2F1(a,b;c;z) by the power series for |z| < 1, and the Pfaff transform for z <= -1.
inline hp f21(hp a, hp b, hp c, hp z) {
  if (z <= -1) return pow(1 - z, -a) * f21(a, c - b, c, z / (z - 1));
  hp term = 1, sum = 1;
  for (int n = 0; n < 20000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z;
    sum += term;
    if (abs(term) < hp(1e-45) * abs(sum)) break;
  }
  return sum;
}

/// (f*g)(p) = \iint_fund f(p - x) g(x) dx as a grid double sum; exact for trigonometric data below the Nyquist band.
inline ctn::GridFn brute_convolve(const ctn::GridFn& f, const ctn::GridFn& g) {
  const int N = f.N;
  ctn::GridFn r(N);
  const double h2 = (2 * ctn::pi / N) * (2 * ctn::pi / N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      std::complex<double> s = 0;
      // coordinate of p - x_j is 2 pi (a - j) / N, grid index a - j + N/2
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
          s += f.at(((a - j + N / 2) % N + N) % N, ((b - k + N / 2) % N + N) % N) * g.at(j, k);
      r.at(a, b) = s * h2 / 2.0;
    }
  return r;
}

/// Random real trigonometric polynomial on the torus with parity-valid modes |m|,|n| <= B.
inline ctn::Spectrum random_real_spectrum(int B, unsigned seed, double decay = 0.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  ctn::Spectrum s(B);
  s.for_each_mut([&](int m, int n, std::complex<double>& z) {
    if (m > 0 || (m == 0 && n >= 0)) z = {nd(rng), nd(rng)};
    z *= std::exp(-decay * (std::abs(m) + std::abs(n)));
  });
  s.for_each_mut([&](int m, int n, std::complex<double>& z) {
    if (m < 0 || (m == 0 && n < 0)) z = std::conj(s(-m, -n));
  });
  s(0, 0) = s(0, 0).real();
  return s;
}

} // namespace oracle

#endif
