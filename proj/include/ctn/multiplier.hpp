#ifndef CTN_MULTIPLIER_HPP
#define CTN_MULTIPLIER_HPP

// Fourier symbol tables of the boundary and collar kernels up to a cutoff M,
// and the symbols derived from them (Neumann, trace, Dirichlet-to-Neumann).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "torus.hpp"

namespace ctn {

/// Real symbol values on |m|,|n| <= M with per-entry error estimates.
struct SymbolTable {
  std::string kernel; // Khat, K0hat, kthat, dkdthat, Kthat (imaginary part)
  double t = 0;       // collar parameter; kernels are evaluated at t/sqrt2
  int M = 0;
  std::string spec_hash;
  std::vector<double> val, err;

  SymbolTable() = default;
  SymbolTable(std::string k, double t_, int M_) : kernel(std::move(k)), t(t_), M(M_) {
    if (M < 1) throw domain_error("SymbolTable: cutoff must be >= 1");
    std::size_t n = static_cast<std::size_t>(2 * M + 1) * (2 * M + 1);
    val.assign(n, std::numeric_limits<double>::quiet_NaN());
    err.assign(n, std::numeric_limits<double>::quiet_NaN());
  }

  bool contains(int m, int n) const { return std::abs(m) <= M && std::abs(n) <= M && parity_valid(m, n); }

  double value(int m, int n) const {
    if (!contains(m, n))
      throw table_error(kernel + " table: no entry (" + std::to_string(m) + "," + std::to_string(n) + ")");
    return val[slot(m, n)];
  }
  double error(int m, int n) const {
    if (!contains(m, n)) throw table_error(kernel + " table: no entry");
    return err[slot(m, n)];
  }
  void set(int m, int n, double v, double e) {
    val[slot(m, n)] = v;
    err[slot(m, n)] = e;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (int m = -M; m <= M; ++m)
      for (int n = -M; n <= M; ++n)
        if (parity_valid(m, n)) fn(m, n, val[slot(m, n)], err[slot(m, n)]);
  }

  struct Extremum {
    int m = 0, n = 0;
    double value = 0;
  };
  Extremum max_abs() const {
    Extremum e;
    for_each([&](int m, int n, double v, double) {
      if (std::abs(v) > std::abs(e.value)) e = {m, n, v};
    });
    return e;
  }
  double max_err() const {
    double r = 0;
    for_each([&](int, int, double, double e) { r = std::max(r, e); });
    return r;
  }

 private:
  std::size_t slot(int m, int n) const {
    return static_cast<std::size_t>(m + M) * (2 * M + 1) + static_cast<std::size_t>(n + M);
  }
};

/// Batched table quadrature: a fine and a coarse origin-graded tensor rule; the
/// fine value is reported and the difference is the error estimate.
struct TableSpec {
  GradedRuleSpec fine{20, 30, 0.5, 0.15};
  GradedRuleSpec coarse{14, 24, 0.5, 0.15};

  TableSpec for_cutoff(int M) const {
    TableSpec s = *this;
    double h = std::min(fine.hmax, 9.0 / std::max(M, 1));
    s.fine.hmax = h;
    s.coarse.hmax = h;
    return s;
  }
};

namespace detail {

struct TrigBasis {
  Eigen::MatrixXd c, s; // (M+1) x nodes
};

inline TrigBasis trig_basis(const Rule1D& r, int M) {
  TrigBasis b{Eigen::MatrixXd(M + 1, r.x.size()), Eigen::MatrixXd(M + 1, r.x.size())};
  for (std::size_t i = 0; i < r.x.size(); ++i)
    for (int m = 0; m <= M; ++m) {
      b.c(m, i) = std::cos(m * r.x[i]);
      b.s(m, i) = std::sin(m * r.x[i]);
    }
  return b;
}

template <class Kern>
Eigen::MatrixXd weighted_samples(const QuarterRule& q, Kern&& kern) {
  Eigen::MatrixXd F(q.u.x.size(), q.v.x.size());
  for (std::size_t j = 0; j < q.v.x.size(); ++j)
    for (std::size_t i = 0; i < q.u.x.size(); ++i) F(i, j) = q.u.w[i] * q.v.w[j] * kern(q.u.x[i], q.v.x[j]);
  return F;
}

// Quadrant values Q(m,n), m,n in [0,M], for one rule; layout depends on the kernel symmetry.
enum class Sym { odd_odd, even_even, joint_even, kt };

struct Quadrant {
  Eigen::MatrixXd a, b; // joint_even: a = cos-cos part, b = sin-sin part; kt: a = sin-cos, b = sin-sin
  double l1 = 0;        // sum of |weighted samples| times the fold factor; bounds every entry
};

template <class Kern>
Quadrant quadrant_values(const GradedRuleSpec& g, int M, Sym sym, Kern&& kern) {
  QuarterRule q = quarter_rule(g);
  TrigBasis bu = trig_basis(q.u, M), bv = trig_basis(q.v, M);
  Quadrant r;
  switch (sym) {
    case Sym::odd_odd: {
      auto F = weighted_samples(q, [&](double u, double v) { return kern(u, v).first; });
      r.a = -4.0 * bu.s * F * bv.s.transpose();
      r.l1 = 4 * F.cwiseAbs().sum();
      break;
    }
    case Sym::even_even: {
      auto F = weighted_samples(q, [&](double u, double v) { return kern(u, v).first; });
      r.a = 4.0 * bu.c * F * bv.c.transpose();
      r.l1 = 4 * F.cwiseAbs().sum();
      break;
    }
    case Sym::joint_even: {
      // 2 [k(u,v) cos(mu+nv) + k(-u,v) cos(mu-nv)] = 2 [(k+ + k-) cc - (k+ - k-) ss]
      Eigen::MatrixXd P(q.u.x.size(), q.v.x.size()), D(q.u.x.size(), q.v.x.size());
      for (std::size_t j = 0; j < q.v.x.size(); ++j)
        for (std::size_t i = 0; i < q.u.x.size(); ++i) {
          auto [kp, km] = kern(q.u.x[i], q.v.x[j]);
          double w = q.u.w[i] * q.v.w[j];
          P(i, j) = w * (kp + km);
          D(i, j) = w * (kp - km);
        }
      r.a = 2.0 * bu.c * P * bv.c.transpose();
      r.b = 2.0 * bu.s * D * bv.s.transpose();
      r.l1 = 2 * (P.cwiseAbs().sum() + D.cwiseAbs().sum());
      break;
    }
    case Sym::kt: {
      Eigen::MatrixXd R(q.u.x.size(), q.v.x.size()), I(q.u.x.size(), q.v.x.size());
      for (std::size_t j = 0; j < q.v.x.size(); ++j)
        for (std::size_t i = 0; i < q.u.x.size(); ++i) {
          auto [re, im] = kern(q.u.x[i], q.v.x[j]);
          double w = q.u.w[i] * q.v.w[j];
          R(i, j) = w * re;
          I(i, j) = w * im;
        }
      r.a = -4.0 * bu.s * R * bv.c.transpose();
      r.b = -4.0 * bu.s * I * bv.s.transpose();
      r.l1 = 4 * (R.cwiseAbs().sum() + I.cwiseAbs().sum());
      break;
    }
  }
  return r;
}

// Value at (m,n) with m,n >= 0 and the sign of n given separately, then completed by symmetry.
inline double quadrant_entry(const Quadrant& q, Sym sym, int m, int n) {
  int am = std::abs(m), an = std::abs(n);
  switch (sym) {
    case Sym::odd_odd: return ((m < 0) != (n < 0) ? -1.0 : 1.0) * q.a(am, an);
    case Sym::even_even: return q.a(am, an);
    case Sym::joint_even: {
      // value depends on the relative sign of m and n only
      bool same = (m >= 0) == (n >= 0) || m == 0 || n == 0;
      return same ? q.a(am, an) - q.b(am, an) : q.a(am, an) + q.b(am, an);
    }
    case Sym::kt: {
      double s = m < 0 ? -1.0 : 1.0;
      return s * (n < 0 ? q.a(am, an) - q.b(am, an) : q.a(am, an) + q.b(am, an));
    }
  }
  return 0;
}

template <class Kern>
SymbolTable build_table(std::string name, double t, int M, const TableSpec& spec, Sym sym, Kern&& kern) {
  if (M < 1) throw domain_error("table cutoff must be >= 1");
  TableSpec ts = spec.for_cutoff(M);
  Quadrant fine = quadrant_values(ts.fine, M, sym, kern);
  Quadrant coarse = quadrant_values(ts.coarse, M, sym, kern);
  // the rule difference vanishes once both rules converge; round-off in the sums does not
  const double rounding = 64 * std::numeric_limits<double>::epsilon() * std::max(fine.l1, coarse.l1);
  SymbolTable tbl(std::move(name), t, M);
  for (int m = -M; m <= M; ++m)
    for (int n = -M; n <= M; ++n) {
      if (!parity_valid(m, n)) continue;
      if ((sym == Sym::odd_odd && (m == 0 || n == 0)) || (sym == Sym::kt && m == 0)) {
        tbl.set(m, n, 0.0, 0.0);
        continue;
      }
      double f = quadrant_entry(fine, sym, m, n), c = quadrant_entry(coarse, sym, m, n);
      tbl.set(m, n, f, std::abs(f - c) + rounding);
    }
  return tbl;
}

inline void check_collar_t(double t, const char* who) {
  if (!(t > 0) || t > collar_max) throw domain_error(std::string(who) + ": t outside (0, pi/100]");
}

inline void check_level_t(double t, const char* who) {
  if (!(t > 0) || t > level_max) throw domain_error(std::string(who) + ": t outside (0, pi/4]");
}

} // namespace detail

/// K^ over |m|,|n| <= M; aborts if any entry reaches 4 pi.
inline SymbolTable build_Khat(int M, const TableSpec& spec = {}) {
  auto tbl = detail::build_table("Khat", 0.0, M, spec, detail::Sym::odd_odd,
                                 [](double u, double v) { return std::pair{eval_K(u, v), 0.0}; });
  auto e = tbl.max_abs();
  if (!(std::abs(e.value) < 4 * pi))
    throw table_error("build_Khat: |K^(" + std::to_string(e.m) + "," + std::to_string(e.n) + ")| >= 4 pi");
  return tbl;
}

inline SymbolTable build_K0hat(int M, const TableSpec& spec = {}) {
  return detail::build_table("K0hat", 0.0, M, spec, detail::Sym::even_even,
                             [](double u, double v) { return std::pair{eval_K0(u, v), 0.0}; });
}

/// Transform of k(t/sqrt2, .) at collar parameter t.
inline SymbolTable build_kthat(double t, int M, const TableSpec& spec = {}) {
  detail::check_level_t(t, "build_kthat");
  const double tau = t / std::numbers::sqrt2;
  return detail::build_table("kthat", t, M, spec, detail::Sym::joint_even, [tau](double u, double v) {
    return std::pair{eval_k(tau, u, v), eval_k(tau, -u, v)};
  });
}

/// Transform of dk/dt evaluated at t/sqrt2.
inline SymbolTable build_dkdthat(double t, int M, const TableSpec& spec = {}) {
  detail::check_level_t(t, "build_dkdthat");
  const double tau = t / std::numbers::sqrt2;
  return detail::build_table("dkdthat", t, M, spec, detail::Sym::joint_even, [tau](double u, double v) {
    return std::pair{eval_dkdt(tau, u, v), eval_dkdt(tau, -u, v)};
  });
}

/// Imaginary part of the K_t transform (K_t evaluated at the given t directly).
inline SymbolTable build_Kthat(double t, int M, const TableSpec& spec = {}) {
  detail::check_collar_t(t, "build_Kthat");
  return detail::build_table("Kthat", t, M, spec, detail::Sym::kt,
                             [t](double u, double v) { return eval_Kt_parts(t, u, v); });
}

inline void require_kernel(const SymbolTable& tbl, const char* k) {
  if (tbl.kernel != k) throw table_error("expected a " + std::string(k) + " table, got " + tbl.kernel);
}

/// sigma(m,n) = -1/2 + K^(m,n)/(8 pi).
inline std::function<double(int, int)> neumann_symbol(const SymbolTable& Khat) {
  require_kernel(Khat, "Khat");
  return [&Khat](int m, int n) { return -0.5 + Khat.value(m, n) / (8 * pi); };
}

/// Trace symbol (sqrt2 / 8 pi) K0^(m,n).
inline std::function<double(int, int)> trace_symbol(const SymbolTable& K0hat) {
  require_kernel(K0hat, "K0hat");
  return [&K0hat](int m, int n) { return std::numbers::sqrt2 / (8 * pi) * K0hat.value(m, n); };
}

/// nu(m,n) = sigma(m,n) / trace symbol; throws on a vanishing trace symbol.
inline std::function<double(int, int)> dtn_symbol(const SymbolTable& Khat, const SymbolTable& K0hat) {
  auto sig = neumann_symbol(Khat);
  auto tr = trace_symbol(K0hat);
  return [sig, tr](int m, int n) {
    double d = tr(m, n);
    if (d == 0.0)
      throw table_error("dtn_symbol: vanishing trace symbol at (" + std::to_string(m) + "," + std::to_string(n) + ")");
    return sig(m, n) / d;
  };
}

namespace detail {

inline void require_within(const Spectrum& s, int M, const char* who) {
  if (s.band() <= M) return;
  s.for_each([&](int m, int n, cplx z) {
    if ((std::abs(m) > M || std::abs(n) > M) && z != cplx(0))
      throw table_error(std::string(who) + ": frequency (" + std::to_string(m) + "," + std::to_string(n) +
                        ") beyond table cutoff");
  });
}

} // namespace detail

/// f^ = h^ / sigma.
inline Spectrum invert_neumann(const Spectrum& h, const SymbolTable& Khat) {
  detail::require_within(h, Khat.M, "invert_neumann");
  auto sig = neumann_symbol(Khat);
  Spectrum f(std::min(h.band(), Khat.M));
  f.for_each_mut([&](int m, int n, cplx& z) { z = h(m, n) / sig(m, n); });
  return f;
}

/// h^ = sigma f^.
inline Spectrum apply_neumann(const Spectrum& f, const SymbolTable& Khat) {
  detail::require_within(f, Khat.M, "apply_neumann");
  auto sig = neumann_symbol(Khat);
  Spectrum h(std::min(f.band(), Khat.M));
  h.for_each_mut([&](int m, int n, cplx& z) { z = f(m, n) * sig(m, n); });
  return h;
}

} // namespace ctn

#endif
