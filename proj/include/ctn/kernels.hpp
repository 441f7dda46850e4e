#ifndef CTN_KERNELS_HPP
#define CTN_KERNELS_HPP

// Closed-form kernels on the collar of the Clifford torus and the
// homogeneous model of the boundary kernel K near the origin.

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <complex>
#include <utility>

#include "errors.hpp"
#include "torus.hpp"

namespace ctn {

inline constexpr double collar_max = pi / 100;
// interior levels evaluated spectrally; k stays regular for 0 < t < pi/2
inline constexpr double level_max = pi / 4;

struct SpherePoint {
  cplx z1, z2;
};

struct CollarPoint {
  double t = 0.0;
  TorusPoint p;

  CollarPoint() = default;
  CollarPoint(double t_, TorusPoint p_) : t(t_), p(p_) {
    if (!(t >= 0.0) || t > collar_max) throw domain_error("CollarPoint: t outside [0, pi/100]");
  }
};

/// Phi(t,u,v); no range check on t so that points off the collar can be probed.
inline SpherePoint chart(double t, double u, double v) {
  // cos and sin of pi/4 + s written symmetrically so that t = 0 gives equal moduli
  double s = t / std::numbers::sqrt2;
  double c = (std::cos(s) - std::sin(s)) / std::numbers::sqrt2;
  double d = (std::cos(s) + std::sin(s)) / std::numbers::sqrt2;
  return {c * std::polar(1.0, v + u), d * std::polar(1.0, v - u)};
}

inline SpherePoint chart(const CollarPoint& c) { return chart(c.t, c.p.u, c.p.v); }

/// Inverse of Phi on the tube |zeta^1| <= |zeta^2|.
inline CollarPoint inverse_chart(const SpherePoint& p) {
  double r1 = std::abs(p.z1), r2 = std::abs(p.z2);
  double t = std::numbers::sqrt2 * (std::atan2(r2, r1) - pi / 4);
  double a1 = std::arg(p.z1), a2 = std::arg(p.z2);
  double u = 0.5 * (a1 - a2), v = 0.5 * (a1 + a2);
  return CollarPoint(t, reduce(u, v));
}

/// G(zeta, eta) = (1/8pi) |1 - zeta . conj(eta)|^{-1}.
inline double green(const SpherePoint& z, const SpherePoint& e) {
  cplx dot = z.z1 * std::conj(e.z1) + z.z2 * std::conj(e.z2);
  double d = std::abs(cplx(1.0) - dot);
  if (d <= 4 * std::numeric_limits<double>::epsilon()) throw domain_error("green: coincident points");
  return 1.0 / (8 * pi * d);
}

namespace detail {

// cos v - cos t cos u in product form (small when t, u, v are small)
template <class Real>
Real collar_A(Real t, Real u, Real v) {
  using std::sin;
  return -sin((v + t - u) / 2) * sin((v - t + u) / 2) - sin((v + t + u) / 2) * sin((v - t - u) / 2);
}

} // namespace detail

template <class Real>
Real eval_g(Real t, Real u, Real v) {
  using std::sin;
  Real A = detail::collar_A(t, u, v);
  Real B = sin(v) - sin(t) * sin(u);
  return A * A + B * B;
}

template <class Real>
Real eval_k(Real t, Real u, Real v) {
  using std::sqrt;
  Real g = eval_g(t, u, v);
  if (!(g > 0)) throw domain_error("eval_k: singular point");
  return 1 / sqrt(g);
}

template <class Real>
Real eval_dkdt(Real t, Real u, Real v) {
  using std::sin; using std::cos; using std::sqrt;
  Real A = detail::collar_A(t, u, v);
  Real B = sin(v) - sin(t) * sin(u);
  Real g = A * A + B * B;
  if (!(g > 0)) throw domain_error("eval_dkdt: singular point");
  return -(A * sin(t) * cos(u) - B * cos(t) * sin(u)) / (g * sqrt(g));
}

/// d(u,v)^4 = (cos u - cos v)^2 + sin^2 v.
template <class Real>
Real eval_d4(Real u, Real v) {
  using std::sin;
  Real A = -2 * sin((v - u) / 2) * sin((v + u) / 2);
  Real s = sin(v);
  return A * A + s * s;
}

template <class Real>
Real eval_K(Real u, Real v) {
  using std::sin; using std::sqrt;
  Real d4 = eval_d4(u, v);
  if (!(d4 > 0)) throw domain_error("eval_K: singular point");
  return sin(u) * sin(v) / (d4 * sqrt(d4));
}

template <class Real>
Real eval_K0(Real u, Real v) {
  using std::sqrt;
  Real d4 = eval_d4(u, v);
  if (!(d4 > 0)) throw domain_error("eval_K0: singular point");
  return 1 / sqrt(d4);
}

/// Real and imaginary parts of K_t.
template <class Real>
std::pair<Real, Real> eval_Kt_parts(Real t, Real u, Real v) {
  using std::sin; using std::sqrt;
  Real A = detail::collar_A(t, u, v);
  Real st = sin(t) * sin(u);
  Real Bp = sin(v) - st, Bm = sin(v) + st;
  Real gp = A * A + Bp * Bp, gm = A * A + Bm * Bm;
  if (!(gp > 0) || !(gm > 0)) throw domain_error("eval_Kt: singular point");
  Real w = 1 / (gp * sqrt(gp)) + 1 / (gm * sqrt(gm));
  Real su = sin(u);
  return {su * A * w, -su * sin(v) * w};
}

inline cplx eval_Kt(double t, double u, double v) {
  auto [re, im] = eval_Kt_parts(t, u, v);
  return {re, im};
}

// Numerators of the partial derivatives of K in half-angle form:
// dK/du = n_u / d^10, dK/dv = n_v / d^10, d2K/du2 = n_uu / d^14.
template <class Real>
Real numer_u(Real u, Real v) {
  using std::sin;
  Real su2 = sin(u / 2), sv2 = sin(v / 2), su = sin(u), sv = sin(v);
  Real a2 = su2 * su2, b2 = sv2 * sv2;
  return sv * (-20 * a2 * a2 + 4 * b2) + sv * (16 * a2 * a2 * a2 + 2 * su * su * b2);
}

template <class Real>
Real numer_v(Real u, Real v) {
  using std::sin; using std::cos;
  Real su2 = sin(u / 2), sv2 = sin(v / 2), su = sin(u), cu2 = cos(u / 2);
  Real a2 = su2 * su2, b2 = sv2 * sv2;
  return su * (4 * a2 * a2 - 8 * b2) + su * b2 * (8 * a2 * (1 + cu2 * cu2) + 4 * cos(u) * b2);
}

template <class Real>
Real numer_uu(Real u, Real v) {
  using std::sin; using std::cos;
  Real su2 = sin(u / 2), sv2 = sin(v / 2), su = sin(u), sv = sin(v);
  Real a2 = su2 * su2, b2 = sv2 * sv2;
  Real a4 = a2 * a2, a8 = a4 * a4;
  return 120 * su * a2 * sv * (a4 - b2) - 64 * su * a8 * sv -
         8 * (cos(u / 2) + cos(3 * u / 2)) * a4 * su2 * sv * b2 + 4 * (14 + su * su) * su * sv * b2 * b2;
}

template <class Real>
Real eval_dK_du(Real u, Real v) {
  using std::sqrt;
  Real d4 = eval_d4(u, v);
  if (!(d4 > 0)) throw domain_error("eval_dK_du: singular point");
  return numer_u(u, v) / (d4 * d4 * sqrt(d4));
}

template <class Real>
Real eval_dK_dv(Real u, Real v) {
  using std::sqrt;
  Real d4 = eval_d4(u, v);
  if (!(d4 > 0)) throw domain_error("eval_dK_dv: singular point");
  return numer_v(u, v) / (d4 * d4 * sqrt(d4));
}

template <class Real>
Real eval_d2K_du2(Real u, Real v) {
  using std::sqrt;
  Real d4 = eval_d4(u, v);
  if (!(d4 > 0)) throw domain_error("eval_d2K_du2: singular point");
  return numer_uu(u, v) / (d4 * d4 * d4 * sqrt(d4));
}

/// Homogeneous model of K at the origin and its derivatives.
template <class Real = double>
struct Approximants {
  Real K, Ku, Kv, Kuu;
  Real n0, n0u, n0v, n0uu;
  Real d0;
};

template <class Real>
Real eval_d0(Real u, Real v) {
  using std::sqrt;
  return sqrt(sqrt(u * u * u * u / 4 + v * v));
}

template <class Real>
Approximants<Real> approximants(Real u, Real v) {
  using std::sqrt;
  Real u2 = u * u, u4 = u2 * u2;
  Real D = u4 / 4 + v * v; // d0^4
  if (!(D > 0)) throw domain_error("approximants: origin");
  Approximants<Real> a;
  a.d0 = sqrt(sqrt(D));
  a.n0 = u * v;
  a.n0u = v * (-5 * u4 / 4 + v * v);
  a.n0v = u * (u4 / 4 - 2 * v * v);
  a.n0uu = Real(15) / 2 * u2 * u * v * (u4 / 4 - v * v);
  Real sD = sqrt(D);
  a.K = a.n0 / (D * sD);
  a.Ku = a.n0u / (D * D * sD);
  a.Kv = a.n0v / (D * D * sD);
  a.Kuu = a.n0uu / (D * D * D * sD);
  return a;
}

/// e0, e1 and c(alpha, a) for an aperture a with the fixed scale b = 2/5.
struct MajorantConstants {
  double a = 0, b = 0.4, e0 = 0, e1 = 0;

  double c(double alpha) const { return alpha * e0 / (4 * std::pow(e1, (alpha + 4) / 4)); }
};

namespace detail {

// the bracket of the d^4 lower bound divided by d0^6, on the unit set d0 = 1, as a function of u >= 0
inline double e0_profile(double u, double a, double b) {
  double u2 = u * u, u4 = u2 * u2;
  double v2 = std::max(0.0, 1 - u4 / 4);
  double av = std::sqrt(v2);
  return u4 * u2 / 24 + u2 * v2 / 2 + 2 * u4 * u2 * (a * b) * (a * b) / 40320 + 2 * av * v2 * b * b / 24;
}

} // namespace detail

inline MajorantConstants majorant_constants(double a) {
  if (!(a > 0) || a > 5) throw domain_error("majorant_constants: aperture outside (0,5]");
  MajorantConstants mc;
  mc.a = a;
  const double b = mc.b;
  const double umax = std::sqrt(2.0);
  const int nscan = 4000;
  int best = 0;
  double fbest = -1;
  for (int i = 0; i <= nscan; ++i) {
    double f = detail::e0_profile(umax * i / nscan, a, b);
    if (f > fbest) { fbest = f; best = i; }
  }
  double lo = umax * std::max(0, best - 1) / nscan, hi = umax * std::min(nscan, best + 1) / nscan;
  auto r = boost::math::tools::brent_find_minima([&](double u) { return -detail::e0_profile(u, a, b); }, lo, hi,
                                                 std::numeric_limits<double>::digits);
  mc.e0 = std::max(fbest, -r.second);
  double d0sq = std::sqrt(std::pow(a * b, 4) / 4 + std::pow(b, 4));
  mc.e1 = 1 - mc.e0 * d0sq;
  if (!(mc.e1 > 0)) throw domain_error("majorant_constants: e1 <= 0");
  return mc;
}

/// Pointwise majorants bounding |K - K_o| and its derivatives on ||(u/a, v)|| <= b.
struct MajorantValues {
  double eps0, epsU, epsV, epsUU;
};

inline MajorantValues majorants(const MajorantConstants& mc, double u, double v) {
  auto A = approximants(u, v);
  double au = std::abs(u), av = std::abs(v);
  double d = A.d0, d2 = d * d, d4 = d2 * d2, d8 = d4 * d4;
  double d10 = d8 * d2, d12 = d8 * d4, d14 = d12 * d2;
  double u2 = au * au, u3 = u2 * au, u5 = u3 * u2, u6 = u5 * au, u7 = u6 * au, u9 = u7 * u2;
  double v2 = av * av, v3 = v2 * av, v4 = v3 * av, v5 = v4 * av;
  double e1_10 = std::pow(mc.e1, 2.5), e1_14 = std::pow(mc.e1, 3.5);
  MajorantValues m;
  m.eps0 = mc.c(6) * std::abs(A.n0) / d4;
  m.epsU = mc.c(10) * std::abs(A.n0u) / d8 + (1451.0 * u6 * av / 3072 + u2 * v3 / 2 + v4 / 3) / (e1_10 * d10);
  m.epsV = mc.c(10) * std::abs(A.n0v) / d8 + (683.0 * u7 / 15360 + u3 * v2 + 7 * au * v3 / 6) / (e1_10 * d10);
  m.epsUU = mc.c(14) * std::abs(A.n0uu) / d12 +
            (1195.0 * u9 * av / 2048 + u5 * v3 / 8 + 5 * u3 * v4 / 2 + 15 * au * v5 / 4) / (e1_14 * d14);
  return m;
}

inline MajorantValues majorants(double a, double u, double v) { return majorants(majorant_constants(a), u, v); }

} // namespace ctn

#endif
