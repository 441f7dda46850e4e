#ifndef CTN_QUADRATURE_HPP
#define CTN_QUADRATURE_HPP

// Adaptive tensor Gauss-Kronrod quadrature on rectangles, with anisotropic
// refinement toward a flagged corner (u-extent ~ delta, v-extent ~ delta^2),
// and fixed origin-graded product rules for batched Fourier integrals.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <queue>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "torus.hpp"

namespace ctn {

struct QuadratureSpec {
  double abs_tol = 1e-9;
  int max_depth = 40;
  int panel_order = 7;          // Gauss nodes per axis; Kronrod extension used for the value
  std::size_t max_panels = 2000000;
  int init_u = 1;               // initial uniform split of the rectangle
  int init_v = 1;
};

struct IntegralResult {
  double value = 0;
  double err_est = 0;
  std::size_t panels = 0;
};

enum class Corner { none, lower_left, lower_right, upper_left, upper_right };

struct Rect {
  double u0, u1, v0, v1;
};

namespace detail {

/// Gauss-Kronrod pair on [-1,1]: Kronrod nodes with both weight sets (Gauss weight 0 off the Gauss nodes).
struct GKRule {
  std::vector<double> x, wk, wg;
};

template <unsigned NG>
GKRule make_gk() {
  using GK = boost::math::quadrature::gauss_kronrod<double, 2 * NG + 1>;
  using G = boost::math::quadrature::gauss<double, NG>;
  const auto& ka = GK::abscissa();
  const auto& kw = GK::weights();
  const auto& ga = G::abscissa();
  const auto& gw = G::weights();
  GKRule r;
  auto gauss_weight = [&](double x) {
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (std::abs(ga[i] - x) < 1e-14) return gw[i];
    return 0.0;
  };
  for (std::size_t i = ka.size(); i-- > 1;) {
    r.x.push_back(-ka[i]); r.wk.push_back(kw[i]); r.wg.push_back(gauss_weight(ka[i]));
  }
  if (ka[0] == 0.0) {
    r.x.push_back(0.0); r.wk.push_back(kw[0]); r.wg.push_back(gauss_weight(0.0));
  } else {
    r.x.push_back(-ka[0]); r.wk.push_back(kw[0]); r.wg.push_back(gauss_weight(ka[0]));
  }
  for (std::size_t i = (ka[0] == 0.0 ? 1 : 0); i < ka.size(); ++i) {
    r.x.push_back(ka[i]); r.wk.push_back(kw[i]); r.wg.push_back(gauss_weight(ka[i]));
  }
  return r;
}

inline const GKRule& gk_rule(int order) {
  static const GKRule r7 = make_gk<7>();
  static const GKRule r10 = make_gk<10>();
  static const GKRule r15 = make_gk<15>();
  static const GKRule r20 = make_gk<20>();
  switch (order) {
    case 7: return r7;
    case 10: return r10;
    case 15: return r15;
    case 20: return r20;
    default: throw domain_error("panel_order must be one of 7, 10, 15, 20");
  }
}

struct Panel {
  Rect r;
  double val, err;
  int depth;
  bool corner;
  std::uint64_t id;
};

template <class F>
void eval_panel(F& f, const GKRule& q, Panel& p) {
  const double hu = 0.5 * (p.r.u1 - p.r.u0), cu = 0.5 * (p.r.u1 + p.r.u0);
  const double hv = 0.5 * (p.r.v1 - p.r.v0), cv = 0.5 * (p.r.v1 + p.r.v0);
  const std::size_t n = q.x.size();
  double sk = 0, sg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = cu + hu * q.x[i];
    double rk = 0, rg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double val = f(u, cv + hv * q.x[j]);
      if (!std::isfinite(val)) throw domain_error("integrate_rect: non-finite integrand");
      rk += q.wk[j] * val;
      rg += q.wg[j] * val;
    }
    sk += q.wk[i] * rk;
    sg += q.wg[i] * rg;
  }
  p.val = sk * hu * hv;
  p.err = std::abs(sk - sg) * hu * hv;
}

inline bool touches(const Rect& r, Corner c, const Rect& whole) {
  switch (c) {
    case Corner::lower_left: return r.u0 == whole.u0 && r.v0 == whole.v0;
    case Corner::lower_right: return r.u1 == whole.u1 && r.v0 == whole.v0;
    case Corner::upper_left: return r.u0 == whole.u0 && r.v1 == whole.v1;
    case Corner::upper_right: return r.u1 == whole.u1 && r.v1 == whole.v1;
    default: return false;
  }
}

} // namespace detail

/// Adaptive integral of f over rect. Panels are refined worst-first; ties break
/// by creation order, so the result is reproducible bit for bit.
template <class F>
IntegralResult integrate_rect(F&& f, Rect rect, const QuadratureSpec& spec, Corner singular = Corner::none) {
  if (!(spec.abs_tol > 0)) throw domain_error("integrate_rect: abs_tol must be positive");
  if (spec.panel_order < 3) throw domain_error("integrate_rect: panel_order must be >= 3");
  const auto& q = detail::gk_rule(spec.panel_order);
  std::vector<detail::Panel> store;
  store.reserve(1024);
  std::uint64_t next_id = 0;
  // index-stable storage: panels are referenced by position
  auto make = [&](Rect r, int depth) {
    detail::Panel p{r, 0, 0, depth, detail::touches(r, singular, rect), next_id++};
    detail::eval_panel(f, q, p);
    store.push_back(p);
    return store.size() - 1;
  };
  struct Cmp {
    const std::vector<detail::Panel>* s;
    bool operator()(std::size_t a, std::size_t b) const {
      const auto &pa = (*s)[a], &pb = (*s)[b];
      if (pa.err != pb.err) return pa.err < pb.err;
      return pa.id > pb.id;
    }
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, Cmp> heap(Cmp{&store});
  std::vector<std::size_t> frozen;
  const int nu = std::max(1, spec.init_u), nv = std::max(1, spec.init_v);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      Rect r{rect.u0 + (rect.u1 - rect.u0) * i / nu, i + 1 == nu ? rect.u1 : rect.u0 + (rect.u1 - rect.u0) * (i + 1) / nu,
             rect.v0 + (rect.v1 - rect.v0) * j / nv, j + 1 == nv ? rect.v1 : rect.v0 + (rect.v1 - rect.v0) * (j + 1) / nv};
      heap.push(make(r, 0));
    }
  double total_err = 0;
  for (auto& p : store) total_err += p.err;
  std::size_t since_resum = store.size();
  while (total_err > spec.abs_tol) {
    if (heap.empty()) break;
    if (store.size() > spec.max_panels) break;
    std::size_t idx = heap.top();
    heap.pop();
    detail::Panel p = store[idx];
    if (p.depth >= spec.max_depth) {
      frozen.push_back(idx);
      continue;
    }
    store[idx].err = -1; // retired
    total_err -= p.err;
    double um, vm;
    Rect r = p.r;
    if (p.corner) {
      bool left = singular == Corner::lower_left || singular == Corner::upper_left;
      bool low = singular == Corner::lower_left || singular == Corner::lower_right;
      um = left ? r.u0 + 0.5 * (r.u1 - r.u0) : r.u1 - 0.5 * (r.u1 - r.u0);
      vm = low ? r.v0 + 0.25 * (r.v1 - r.v0) : r.v1 - 0.25 * (r.v1 - r.v0);
    } else {
      um = 0.5 * (r.u0 + r.u1);
      vm = 0.5 * (r.v0 + r.v1);
    }
    const Rect kids[4] = {{r.u0, um, r.v0, vm}, {um, r.u1, r.v0, vm}, {r.u0, um, vm, r.v1}, {um, r.u1, vm, r.v1}};
    for (const auto& k : kids) {
      std::size_t c = make(k, p.depth + 1);
      total_err += store[c].err;
      heap.push(c);
    }
    if (store.size() >= 2 * since_resum) {
      since_resum = store.size();
      total_err = 0;
      for (auto& s : store)
        if (s.err >= 0) total_err += s.err;
    }
  }
  IntegralResult res;
  for (auto& s : store)
    if (s.err >= 0) {
      res.value += s.val;
      res.err_est += s.err;
      ++res.panels;
    }
  if (res.err_est > spec.abs_tol)
    throw quadrature_error("integrate_rect: tolerance " + std::to_string(spec.abs_tol) + " not reached (err " +
                           std::to_string(res.err_est) + ", panels " + std::to_string(res.panels) + ")");
  return res;
}

/// Adaptive Gauss-Kronrod integral over [a,b] split at the given interior breakpoints.
template <class F>
IntegralResult integrate_line(F&& f, double a, double b, const QuadratureSpec& spec,
                              std::vector<double> breaks = {}) {
  const auto& q = detail::gk_rule(spec.panel_order);
  struct Seg {
    double a, b, val, err;
    int depth;
    std::uint64_t id;
  };
  std::vector<Seg> store;
  std::uint64_t next_id = 0;
  auto make = [&](double x0, double x1, int depth) {
    double h = 0.5 * (x1 - x0), c = 0.5 * (x1 + x0), sk = 0, sg = 0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      double y = f(c + h * q.x[i]);
      if (!std::isfinite(y)) throw domain_error("integrate_line: non-finite integrand");
      sk += q.wk[i] * y;
      sg += q.wg[i] * y;
    }
    store.push_back({x0, x1, sk * h, std::abs(sk - sg) * std::abs(h), depth, next_id++});
    return store.size() - 1;
  };
  auto cmp = [&](std::size_t x, std::size_t y) {
    if (store[x].err != store[y].err) return store[x].err < store[y].err;
    return store[x].id > store[y].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) heap.push(make(pts[i], pts[i + 1], 0));
  auto total = [&] {
    double e = 0;
    for (auto& s : store)
      if (s.err >= 0) e += s.err;
    return e;
  };
  double err = total();
  std::size_t since_resum = store.size();
  while (err > spec.abs_tol && !heap.empty() && store.size() < spec.max_panels) {
    std::size_t i = heap.top();
    heap.pop();
    if (store[i].depth >= 2 * spec.max_depth) continue;
    Seg s = store[i];
    store[i].err = -1;
    err -= s.err;
    double m = 0.5 * (s.a + s.b);
    std::size_t l = make(s.a, m, s.depth + 1), r = make(m, s.b, s.depth + 1);
    err += store[l].err + store[r].err;
    heap.push(l);
    heap.push(r);
    if (store.size() >= 2 * since_resum) {
      since_resum = store.size();
      err = total();
    }
  }
  IntegralResult res;
  for (auto& s : store)
    if (s.err >= 0) {
      res.value += s.val;
      res.err_est += s.err;
      ++res.panels;
    }
  if (res.err_est > spec.abs_tol)
    throw quadrature_error("integrate_line: tolerance not reached (err " + std::to_string(res.err_est) + ")");
  return res;
}

/// Reduction of an anisotropically homogeneous integral over ||(u/a,v)|| >= 1 to
/// line integrals: B = 2a \int_{-1}^{1} h(a,v) dv + 4 \int_{-a}^{a} h(u,1) du, for h
/// even in u and in v. Degree -5 returns B/2 (the exterior integral); degree -3
/// returns B, the coefficient of log(b/R) for the shell R < ||.|| <= b.
template <class H>
IntegralResult homogeneous_tail(H&& h, double a, int degree, const QuadratureSpec& spec,
                                std::vector<double> v_breaks = {}, std::vector<double> u_breaks = {}) {
  if (degree != -5 && degree != -3) throw domain_error("homogeneous_tail: unsupported degree");
  v_breaks.push_back(0.0);
  u_breaks.push_back(0.0);
  QuadratureSpec s = spec;
  s.abs_tol = spec.abs_tol / 16;
  auto r1 = integrate_line([&](double v) { return h(a, v); }, -1.0, 1.0, s, v_breaks);
  auto r2 = integrate_line([&](double u) { return h(u, 1.0); }, -a, a, s, u_breaks);
  double scale = degree == -5 ? 0.5 : 1.0;
  IntegralResult r;
  r.value = scale * (2 * a * r1.value + 4 * r2.value);
  r.err_est = scale * (2 * a * r1.err_est + 4 * r2.err_est);
  r.panels = r1.panels + r2.panels;
  return r;
}

// ---------------------------------------------------------------------------
// Fourier coefficients by adaptive quadrature over the quarter [0,pi] x [0,pi/2]
// (the fundamental domain folded by the kernel symmetries).

namespace detail {

inline QuadratureSpec freq_spec(QuadratureSpec s, int m, int n) {
  s.init_u = std::max(s.init_u, static_cast<int>(std::ceil(std::abs(m) * pi / 6.0)));
  s.init_v = std::max(s.init_v, static_cast<int>(std::ceil(std::abs(n) * pi / 12.0)));
  return s;
}

inline const Rect quarter{0.0, pi, 0.0, pi / 2};

} // namespace detail

/// K^(m,n) = -\iint_fund K sin(mu) sin(nv).
inline IntegralResult khat(int m, int n, const QuadratureSpec& spec) {
  if (!parity_valid(m, n)) throw parity_error("khat: mixed parity");
  if (m == 0 || n == 0) return {};
  auto r = integrate_rect([&](double u, double v) { return eval_K(u, v) * std::sin(m * u) * std::sin(n * v); },
                          detail::quarter, detail::freq_spec(spec, m, n), Corner::lower_left);
  return {-4 * r.value, 4 * r.err_est, r.panels};
}

/// K0^(m,n) = \iint_fund k(0,u,v) cos(mu) cos(nv).
inline IntegralResult k0hat(int m, int n, const QuadratureSpec& spec) {
  if (!parity_valid(m, n)) throw parity_error("k0hat: mixed parity");
  auto r = integrate_rect([&](double u, double v) { return eval_K0(u, v) * std::cos(m * u) * std::cos(n * v); },
                          detail::quarter, detail::freq_spec(spec, m, n), Corner::lower_left);
  return {4 * r.value, 4 * r.err_est, r.panels};
}

/// Transform of a kernel even under (u,v) -> (-u,-v): real, 2\iint_Q [k(u,v)cos(mu+nv) + k(-u,v)cos(mu-nv)].
template <class Kern>
IntegralResult joint_even_hat(Kern&& kern, int m, int n, const QuadratureSpec& spec) {
  auto r = integrate_rect(
      [&](double u, double v) { return kern(u, v) * std::cos(m * u + n * v) + kern(-u, v) * std::cos(m * u - n * v); },
      detail::quarter, detail::freq_spec(spec, m, n), Corner::lower_left);
  return {2 * r.value, 2 * r.err_est, r.panels};
}

/// Collar kernel transform at collar parameter t (kernel evaluated at t/sqrt2).
inline IntegralResult kthat_entry(double t, int m, int n, const QuadratureSpec& spec) {
  if (!parity_valid(m, n)) throw parity_error("kthat: mixed parity");
  const double tau = t / std::numbers::sqrt2;
  return joint_even_hat([tau](double u, double v) { return eval_k(tau, u, v); }, m, n, spec);
}

inline IntegralResult dkdthat_entry(double t, int m, int n, const QuadratureSpec& spec) {
  if (!parity_valid(m, n)) throw parity_error("dkdthat: mixed parity");
  const double tau = t / std::numbers::sqrt2;
  return joint_even_hat([tau](double u, double v) { return eval_dkdt(tau, u, v); }, m, n, spec);
}

/// Imaginary part of the K_t transform (the real part vanishes by symmetry).
inline IntegralResult Kthat_entry(double t, int m, int n, const QuadratureSpec& spec) {
  if (!parity_valid(m, n)) throw parity_error("Kthat: mixed parity");
  if (m == 0) return {};
  auto r = integrate_rect(
      [&](double u, double v) {
        auto [re, im] = eval_Kt_parts(t, u, v);
        return std::sin(m * u) * (re * std::cos(n * v) + im * std::sin(n * v));
      },
      detail::quarter, detail::freq_spec(spec, m, n), Corner::lower_left);
  return {-4 * r.value, 4 * r.err_est, r.panels};
}

/// (1/8pi) \iint_fund dk/dt(t,u,v) du dv.
inline IntegralResult dkdt_mass(double t, const QuadratureSpec& spec) {
  if (!(t > 0) || t > level_max) throw domain_error("dkdt_mass: t outside (0, pi/4]");
  auto r = integrate_rect([t](double u, double v) { return eval_dkdt(t, u, v) + eval_dkdt(t, -u, v); },
                          detail::quarter, spec, Corner::lower_left);
  return {2 * r.value / (8 * pi), 2 * r.err_est / (8 * pi), r.panels};
}

/// (1/8pi) \iint_fund [F(p - x) - F(p)] K(x) dx in subtracted form, folded onto the quarter.
template <class Fn>
IntegralResult pv_apply_N(Fn&& F, TorusPoint p, const QuadratureSpec& spec) {
  const double Fp = F(p.u, p.v);
  auto r = integrate_rect(
      [&](double u, double v) {
        double s = (F(p.u - u, p.v - v) - Fp) - (F(p.u + u, p.v - v) - Fp) - (F(p.u - u, p.v + v) - Fp) +
                   (F(p.u + u, p.v + v) - Fp);
        return s * eval_K(u, v);
      },
      detail::quarter, spec, Corner::lower_left);
  return {r.value / (8 * pi), r.err_est / (8 * pi), r.panels};
}

// ---------------------------------------------------------------------------
// Fixed origin-graded composite Gauss-Legendre rules.

struct Rule1D {
  std::vector<double> x, w;
};

namespace detail {

inline const Rule1D& legendre_rule(int p) {
  static std::mutex mtx;
  static std::map<int, Rule1D> cache;
  std::lock_guard<std::mutex> lk(mtx);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  Rule1D r;
  auto z = boost::math::legendre_p_zeros<double>(p); // nonnegative zeros, ascending
  std::vector<std::pair<double, double>> nodes;
  for (double x : z) {
    double dp = boost::math::legendre_p_prime(p, x);
    double w = 2.0 / ((1 - x * x) * dp * dp);
    nodes.push_back({x, w});
    if (x != 0.0) nodes.push_back({-x, w});
  }
  std::sort(nodes.begin(), nodes.end());
  for (auto& [x, w] : nodes) {
    r.x.push_back(x);
    r.w.push_back(w);
  }
  return cache.emplace(p, std::move(r)).first->second;
}

inline void append_panel(Rule1D& r, double a, double b, int p) {
  const auto& g = legendre_rule(p);
  double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    r.x.push_back(c + h * g.x[i]);
    r.w.push_back(h * g.w[i]);
  }
}

} // namespace detail

struct GradedRuleSpec {
  int order = 16;       // Gauss-Legendre nodes per panel
  int layers = 30;      // geometric layers toward 0 (ratio 1/2)
  double x0 = 0.5;      // geometric region [0, x0]
  double hmax = 0.15;   // maximum panel width (resolves oscillation)
};

/// Composite rule on [0, X], graded geometrically toward 0.
inline Rule1D graded_rule(double X, const GradedRuleSpec& g) {
  Rule1D r;
  double x0 = std::min(g.x0, X);
  double lo = x0 * std::ldexp(1.0, -g.layers);
  detail::append_panel(r, 0.0, lo, g.order);
  for (int k = g.layers; k >= 1; --k) {
    double a = x0 * std::ldexp(1.0, -k), b = x0 * std::ldexp(1.0, -k + 1);
    int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / g.hmax)));
    for (int i = 0; i < pieces; ++i) detail::append_panel(r, a + (b - a) * i / pieces, a + (b - a) * (i + 1) / pieces, g.order);
  }
  if (X > x0) {
    int pieces = std::max(1, static_cast<int>(std::ceil((X - x0) / g.hmax)));
    for (int i = 0; i < pieces; ++i) detail::append_panel(r, x0 + (X - x0) * i / pieces, x0 + (X - x0) * (i + 1) / pieces, g.order);
  }
  return r;
}

/// Tensor rule on the quarter [0,pi] x [0,pi/2], graded toward the origin with
/// v-layers twice as deep as u-layers (the parabolic scaling v ~ u^2).
struct QuarterRule {
  Rule1D u, v;
};

inline QuarterRule quarter_rule(const GradedRuleSpec& g) {
  GradedRuleSpec gv = g;
  gv.layers = 2 * g.layers;
  gv.x0 = g.x0 / 2;
  return {graded_rule(pi, g), graded_rule(pi / 2, gv)};
}

} // namespace ctn

#endif
