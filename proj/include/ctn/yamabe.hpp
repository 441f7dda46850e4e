#ifndef CTN_YAMABE_HPP
#define CTN_YAMABE_HPP

// u = 2F1(1/2,1/2;1;|zeta^2|^2) / 2F1(1/2,1/2;1;1/2), the radial solution of L u = 0.

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"

namespace ctn {

enum class HypergeomMethod { series, log_transform };

struct HypergeomValue {
  double x = 0;
  double value = 0;
  HypergeomMethod method = HypergeomMethod::series;
};

namespace detail {

// sum_n (a)_n (b)_n / ((c)_n n!) x^n for |x| < 1
inline double f21_series(double a, double b, double c, double x) {
  double term = 1, sum = 1;
  for (int n = 0; n < 200000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) return sum;
  }
  throw domain_error("f21_series: no convergence");
}

// c = a + b connection formula in 1 - x, a = b = 1/2
inline double f21_half_log(double x) {
  const double y = 1 - x, ly = std::log(y);
  double coef = 1;                    // ((1/2)_n / n!)^2
  double psi_diff = 2 * std::numbers::ln2;  // psi(n+1) - psi(n+1/2)
  double yn = 1, sum = 0;
  for (int n = 0; n < 10000; ++n) {
    double term = coef * (2 * psi_diff - ly) * yn;
    sum += term;
    if (n > 0 && std::abs(term) < 1e-17 * std::abs(sum)) break;
    double r = (n + 0.5) / (n + 1);
    coef *= r * r;
    psi_diff += 1.0 / (n + 1) - 1.0 / (n + 0.5);
    yn *= y;
  }
  return sum / std::numbers::pi;
}

} // namespace detail

inline HypergeomValue f21_half_eval(double x) {
  if (!(x >= 0) || !(x < 1)) throw domain_error("f21_half: x outside [0,1)");
  if (x <= 0.5) return {x, detail::f21_series(0.5, 0.5, 1, x), HypergeomMethod::series};
  return {x, detail::f21_half_log(x), HypergeomMethod::log_transform};
}

inline double f21_half(double x) { return f21_half_eval(x).value; }

/// F'(x) = (1/4) 2F1(3/2,3/2;2;x).
inline double f21_half_d1(double x) {
  if (!(x >= 0) || !(x < 1)) throw domain_error("f21_half_d1: x outside [0,1)");
  return 0.25 * detail::f21_series(1.5, 1.5, 2, x);
}

/// F''(x) = (9/32) 2F1(5/2,5/2;3;x).
inline double f21_half_d2(double x) {
  if (!(x >= 0) || !(x < 1)) throw domain_error("f21_half_d2: x outside [0,1)");
  return 9.0 / 32 * detail::f21_series(2.5, 2.5, 3, x);
}

inline double f21_half_at_half() {
  static const double v = f21_half(0.5);
  return v;
}

inline double yamabe_of_x(double x) { return x == 0.5 ? 1.0 : f21_half(x) / f21_half_at_half(); }

/// Normalized factor at a point of the sphere; the moduli are renormalized first.
inline double yamabe_factor(const SpherePoint& p) {
  double a = std::norm(p.z1), b = std::norm(p.z2);
  if (!(a + b > 0)) throw domain_error("yamabe_factor: zero vector");
  if (a == 0) throw domain_error("yamabe_factor: core circle");
  return yamabe_of_x(a == b ? 0.5 : b / (a + b));
}

/// Factor at collar level t; exactly 1 at t = 0.
inline double yamabe_factor_collar(double t) {
  if (t == 0) return 1.0;
  double s = std::sin(pi / 4 + t / std::numbers::sqrt2);
  if (!(s * s < 1)) throw domain_error("yamabe_factor_collar: core circle");
  return yamabe_of_x(s * s);
}

/// u(r) with |zeta^2|^2 = cos^2(r/2).
inline double yamabe_radial(double r) {
  if (!(r > 0) || !(r <= pi)) throw domain_error("yamabe_radial: r outside (0, pi]");
  return yamabe_of_x(r == pi / 2 ? 0.5 : (1 + std::cos(r)) / 2);
}

/// (1 - x^2) u'' - 2x u' - u/4 for u(x) = F((1+x)/2); series derivatives for x <= 0, centred differences otherwise.
inline double ode_residual(double x, double h = 1e-4) {
  if (!(x > -1) || !(x < 1)) throw domain_error("ode_residual: x outside (-1,1)");
  const double y = (1 + x) / 2;
  double u = f21_half(y), du, d2u;
  if (x <= 0) {
    du = f21_half_d1(y) / 2;
    d2u = f21_half_d2(y) / 4;
  } else {
    if (!(x - h > -1) || !(x + h < 1)) throw domain_error("ode_residual: stencil leaves (-1,1)");
    double up = f21_half((1 + x + h) / 2), um = f21_half((1 + x - h) / 2);
    du = (up - um) / (2 * h);
    d2u = (up - 2 * u + um) / (h * h);
  }
  return (1 - x * x) * d2u - 2 * x * du - u / 4;
}

/// u_rr + cot r u_r - u/4 for the normalized radial factor.
inline double radial_residual(double r) {
  if (!(r > 0) || !(r < pi)) throw domain_error("radial_residual: r outside (0, pi)");
  const double y = (1 + std::cos(r)) / 2, y1 = -std::sin(r) / 2, y2 = -std::cos(r) / 2;
  const double c = f21_half_at_half();
  double F = f21_half(y) / c, F1 = f21_half_d1(y) / c, F2 = f21_half_d2(y) / c;
  double ur = F1 * y1, urr = F2 * y1 * y1 + F1 * y2;
  return urr + std::cos(r) / std::sin(r) * ur - F / 4;
}

/// max |radial_residual| over the grid.
inline double polar_L_residual(const std::vector<double>& r_grid) {
  double worst = 0;
  for (double r : r_grid) {
    if (!(r > 0) || !(r < pi)) throw domain_error("polar_L_residual: grid touches a singular radius");
    worst = std::max(worst, std::abs(radial_residual(r)));
  }
  return worst;
}

} // namespace ctn

#endif
