#ifndef CTN_TORUS_HPP
#define CTN_TORUS_HPP

// The torus R^2 / Lambda with Lambda = {(pi m, pi n) : m = n mod 2}.
// Functions are sampled on the square cover [-pi,pi)^2, which covers a
// fundamental domain twice; coefficients use the fundamental-domain
// normalization  F^(m,n) = \iint_fund F e^{-i(mu+nv)} du dv.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ctn {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi_sq = 2.0 * pi * pi; // area of the fundamental domain

inline bool parity_valid(long m, long n) { return ((m - n) % 2) == 0; }

struct Freq {
  int m = 0;
  int n = 0;

  Freq() = default;
  Freq(int m_, int n_) : m(m_), n(n_) {
    if (!parity_valid(m, n))
      throw parity_error("frequency (" + std::to_string(m) + "," + std::to_string(n) +
                         ") has mixed parity");
  }
  friend bool operator==(const Freq&, const Freq&) = default;
  friend auto operator<=>(const Freq&, const Freq&) = default;
};

/// Representative in the half-open box [-pi,pi) x [-pi/2,pi/2).
struct TorusPoint {
  double u = 0.0;
  double v = 0.0;

  static TorusPoint reduce(double u, double v) {
    if (!std::isfinite(u) || !std::isfinite(v))
      throw domain_error("reduce: non-finite coordinate");
    // shift along (pi,pi) to bring v into range, then along (2pi,0)
    double k = std::floor((v + pi / 2) / pi);
    v -= k * pi;
    u -= k * pi;
    if (v >= pi / 2) { v -= pi; u -= pi; }
    if (v < -pi / 2) { v += pi; u += pi; }
    double j = std::floor((u + pi) / (2 * pi));
    u -= j * 2 * pi;
    if (u >= pi) u -= 2 * pi;
    if (u < -pi) u += 2 * pi;
    return {u, v};
  }
};

inline TorusPoint reduce(double u, double v) { return TorusPoint::reduce(u, v); }

/// Anisotropic norm max(|u|, |v|^{1/2}) evaluated on the given representative.
inline double torus_norm(const TorusPoint& p) { return std::max(std::abs(p.u), std::sqrt(std::abs(p.v))); }
inline double torus_norm(double u, double v) { return std::max(std::abs(u), std::sqrt(std::abs(v))); }

/// N x N samples on the square cover, row-major with u the slow index.
struct GridFn {
  int N = 0;
  std::vector<cplx> samples;

  GridFn() = default;
  explicit GridFn(int n) : N(n), samples(static_cast<std::size_t>(n) * n) {
    if (n <= 0 || n % 2 != 0) throw domain_error("GridFn: N must be positive and even");
  }

  double coord(int j) const { return -pi + 2 * pi * j / N; }
  cplx& at(int j, int k) { return samples[static_cast<std::size_t>(j) * N + k]; }
  const cplx& at(int j, int k) const { return samples[static_cast<std::size_t>(j) * N + k]; }

  double max_abs() const {
    double r = 0;
    for (auto& z : samples) r = std::max(r, std::abs(z));
    return r;
  }
};

/// Sample F on the square cover.
template <class F>
GridFn lift(F&& f, int N) {
  GridFn g(N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) g.at(j, k) = cplx(f(g.coord(j), g.coord(k)));
  return g;
}

/// Max |F(u+pi,v+pi) - F(u,v)| relative to max |F|.
inline double checkerboard_defect(const GridFn& g) {
  int h = g.N / 2;
  double d = 0;
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k)
      d = std::max(d, std::abs(g.at((j + h) % g.N, (k + h) % g.N) - g.at(j, k)));
  double s = g.max_abs();
  return s > 0 ? d / s : d;
}

/// Lattice Fourier coefficients on the band |m|,|n| <= B, parity-valid only.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(int band) : B_(band), c_(static_cast<std::size_t>(2 * band + 1) * (2 * band + 1)) {
    if (band < 0) throw domain_error("Spectrum: negative band");
  }

  int band() const { return B_; }
  bool contains(int m, int n) const { return std::abs(m) <= B_ && std::abs(n) <= B_ && parity_valid(m, n); }

  cplx& operator()(int m, int n) { return c_[index(m, n)]; }
  const cplx& operator()(int m, int n) const { return c_[index(m, n)]; }
  cplx& operator[](Freq f) { return (*this)(f.m, f.n); }
  const cplx& operator[](Freq f) const { return (*this)(f.m, f.n); }

  /// Visit every stored (parity-valid) frequency in a fixed order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    for (int m = -B_; m <= B_; ++m)
      for (int n = -B_; n <= B_; ++n)
        if (parity_valid(m, n)) fn(m, n, c_[slot(m, n)]);
  }
  template <class Fn>
  void for_each_mut(Fn&& fn) {
    for (int m = -B_; m <= B_; ++m)
      for (int n = -B_; n <= B_; ++n)
        if (parity_valid(m, n)) fn(m, n, c_[slot(m, n)]);
  }

  double l2_sq() const {
    double s = 0;
    for_each([&](int, int, cplx z) { s += std::norm(z); });
    return s;
  }

 private:
  std::size_t slot(int m, int n) const {
    return static_cast<std::size_t>(m + B_) * (2 * B_ + 1) + static_cast<std::size_t>(n + B_);
  }
  std::size_t index(int m, int n) const {
    if (!parity_valid(m, n))
      throw parity_error("Spectrum: mixed-parity frequency (" + std::to_string(m) + "," + std::to_string(n) + ")");
    if (std::abs(m) > B_ || std::abs(n) > B_)
      throw domain_error("Spectrum: frequency (" + std::to_string(m) + "," + std::to_string(n) + ") outside band");
    return slot(m, n);
  }

  int B_ = 0;
  std::vector<cplx> c_;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized 2D DFT with sign -1 (forward) or +1 (backward).
inline std::vector<cplx> dft2(const std::vector<cplx>& in, int N, int sign) {
  std::vector<cplx> out(in.size());
  std::vector<cplx> src(in);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(N, N, reinterpret_cast<fftw_complex*>(src.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

inline int wrap(int m, int N) { return ((m % N) + N) % N; }

} // namespace detail

/// Square-cover coefficients \iint_{[-pi,pi)^2} F e^{-i(mu+nv)} for all 0 <= index < N.
inline std::vector<cplx> square_cover_coefficients(const GridFn& f) {
  const int N = f.N;
  auto c = detail::dft2(f.samples, N, -1);
  const double h2 = (2 * pi / N) * (2 * pi / N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      int m = a < N / 2 ? a : a - N;
      int n = b < N / 2 ? b : b - N;
      double s = ((m + n) % 2 == 0) ? 1.0 : -1.0; // (-1)^{m+n} from the offset -pi
      c[static_cast<std::size_t>(a) * N + b] *= s * h2;
    }
  return c;
}

/// Largest mixed-parity square-cover coefficient, relative to the square-cover L2 norm of f.
inline double mixed_parity_leak(const GridFn& f) {
  const int N = f.N;
  auto c = square_cover_coefficients(f);
  double leak = 0, norm2 = 0;
  for (auto& z : f.samples) norm2 += std::norm(z);
  norm2 *= (2 * pi / N) * (2 * pi / N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      if ((a + b) % 2 != 0) leak = std::max(leak, std::abs(c[static_cast<std::size_t>(a) * N + b]));
  double nrm = std::sqrt(norm2);
  return nrm > 0 ? leak / nrm : leak;
}

/// Forward transform onto the band |m|,|n| <= N/2 - 1.
inline Spectrum forward_transform(const GridFn& f, double checkerboard_tol = 1e-8) {
  if (f.N <= 0 || f.N % 2 != 0) throw domain_error("forward_transform: N must be even");
  if (checkerboard_tol >= 0 && checkerboard_defect(f) > checkerboard_tol)
    throw domain_error("forward_transform: samples are not checkerboard symmetric");
  const int N = f.N;
  auto c = square_cover_coefficients(f);
  Spectrum s(N / 2 - 1);
  s.for_each_mut([&](int m, int n, cplx& z) {
    z = 0.5 * c[static_cast<std::size_t>(detail::wrap(m, N)) * N + detail::wrap(n, N)];
  });
  return s;
}

/// Synthesis F(u,v) = (1/2pi^2) sum F^(m,n) e^{i(mu+nv)} on an N x N square-cover grid.
inline GridFn inverse_transform(const Spectrum& s, int N) {
  if (N <= 0 || N % 2 != 0) throw domain_error("inverse_transform: N must be even");
  if (s.band() >= N / 2) throw domain_error("inverse_transform: band does not fit the grid");
  std::vector<cplx> c(static_cast<std::size_t>(N) * N);
  s.for_each([&](int m, int n, cplx z) {
    // offset -pi contributes (-1)^{m+n} = 1 on parity-valid modes
    c[static_cast<std::size_t>(detail::wrap(m, N)) * N + detail::wrap(n, N)] = z / two_pi_sq;
  });
  GridFn g(N);
  g.samples = detail::dft2(c, N, +1);
  return g;
}

/// Evaluate the trigonometric sum at an arbitrary point.
inline cplx synthesize(const Spectrum& s, double u, double v) {
  cplx r = 0;
  s.for_each([&](int m, int n, cplx z) {
    if (z != cplx(0)) r += z * std::polar(1.0, m * u + n * v);
  });
  return r / two_pi_sq;
}

/// Pointwise product in frequency space.
template <class Symbol>
Spectrum apply_symbol(const Spectrum& s, Symbol&& symbol) {
  Spectrum r(s.band());
  s.for_each([&](int m, int n, cplx z) { r(m, n) = z * cplx(symbol(m, n)); });
  return r;
}

/// (f*g)(p) = \iint_fund f(p - x) g(x) dx via the multiplier route.
inline GridFn convolve(const GridFn& f, const GridFn& g) {
  if (f.N != g.N) throw domain_error("convolve: grid size mismatch");
  auto F = forward_transform(f);
  auto G = forward_transform(g);
  Spectrum P(F.band());
  F.for_each([&](int m, int n, cplx z) { P(m, n) = z * G(m, n); });
  return inverse_transform(P, f.N);
}

/// Restrict or zero-extend a spectrum to band B.
inline Spectrum rebanded(const Spectrum& s, int B) {
  Spectrum r(B);
  r.for_each_mut([&](int m, int n, cplx& z) {
    if (s.contains(m, n)) z = s(m, n);
  });
  return r;
}

} // namespace ctn

#endif
