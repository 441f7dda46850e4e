#ifndef CTN_CERTIFY_HPP
#define CTN_CERTIFY_HPP

// Numerical reproduction of the bound sup |K^(m,n)| < 4 pi: the constants of
// the two tail lemmas, the corollary formulas, the frequency partition, and
// a machine-readable certificate.

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "multiplier.hpp"
#include "quadrature.hpp"

namespace ctn {

struct Constant {
  double value = 0;
  double err = 0;
};

/// Lemma constants for one aperture a: the I family (large m) and the J family (large n).
struct LemmaConstants {
  double a = 0;
  MajorantConstants mc;
  Constant I0, I1, I2, I3, epsI0, epsI1, epsI2, epsI3, epsI4;
  Constant J0, J1, J2, epsJ0, epsJ1, epsJ2, epsJ3;
};

struct ConstantsSpec {
  double abs_tol = 1e-9;   // line and bounded-region integrals
  double tail_tol = 1e-7;  // epsI4 / epsJ3 over the fundamental domain
};

namespace detail {

inline Constant as_const(const IntegralResult& r, double scale = 1.0) { return {scale * r.value, std::abs(scale) * r.err_est}; }

// kinks of |h(a, v)| and |h(u, 1)| where the homogeneous numerators vanish
inline std::vector<double> symmetric_breaks(std::initializer_list<double> xs, double lim) {
  std::vector<double> b;
  for (double x : xs)
    if (x > 0 && x < lim) {
      b.push_back(x);
      b.push_back(-x);
    }
  return b;
}

} // namespace detail

inline LemmaConstants compute_constants(double a, const ConstantsSpec& cs = {}) {
  LemmaConstants C;
  C.a = a;
  C.mc = majorant_constants(a);
  const MajorantConstants& mc = C.mc;
  const double b = mc.b;
  QuadratureSpec q;
  q.abs_tol = cs.abs_tol;

  auto Ko = [](double u, double v) { return std::abs(approximants(u, v).K); };
  auto Kou = [](double u, double v) { return std::abs(approximants(u, v).Ku); };
  auto Kov = [](double u, double v) { return std::abs(approximants(u, v).Kv); };
  auto Kouu = [](double u, double v) { return std::abs(approximants(u, v).Kuu); };
  auto e0 = [&](double u, double v) { return majorants(mc, u, v).eps0; };
  auto eu = [&](double u, double v) { return majorants(mc, u, v).epsU; };
  auto ev = [&](double u, double v) { return majorants(mc, u, v).epsV; };
  auto euu = [&](double u, double v) { return majorants(mc, u, v).epsUU; };

  // zero sets of n0u (v^2 = 5u^4/4), n0v (u^4 = 8 v^2), n0uu (v^2 = u^4/4)
  const double a2 = a * a;
  auto vb_u = detail::symmetric_breaks({std::sqrt(1.25) * a2}, 1.0);
  auto vb_v = detail::symmetric_breaks({a2 / std::sqrt(8.0)}, 1.0);
  auto vb_uu = detail::symmetric_breaks({a2 / 2}, 1.0);
  auto ub_u = detail::symmetric_breaks({std::pow(0.8, 0.25)}, a);
  auto ub_v = detail::symmetric_breaks({std::pow(8.0, 0.25)}, a);
  auto ub_uu = detail::symmetric_breaks({std::sqrt(2.0)}, a);

  Rect box{0, a, 0, 1};
  auto uvKo = [&](double u, double v) { return std::abs(u * v) * Ko(u, v); };
  auto uve0 = [&](double u, double v) { return std::abs(u * v) * e0(u, v); };
  C.I0 = detail::as_const(integrate_rect(uvKo, box, q, Corner::lower_left), 4.0);
  C.J0 = C.I0;
  C.epsI0 = detail::as_const(integrate_rect(uve0, box, q, Corner::lower_left), 4.0);
  C.epsJ0 = C.epsI0;

  C.I1 = detail::as_const(integrate_line([&](double v) { return Ko(a, v); }, -1, 1, q, {0.0}), 2.0);
  C.I2 = detail::as_const(integrate_line([&](double v) { return Kou(a, v); }, -1, 1, q, vb_u), 2.0);
  C.I3 = detail::as_const(homogeneous_tail(Kouu, a, -5, q, vb_uu, ub_uu));
  C.epsI1 = detail::as_const(integrate_line([&](double v) { return e0(a, v); }, -1, 1, q, {0.0}), 2.0);
  C.epsI2 = detail::as_const(integrate_line([&](double v) { return eu(a, v); }, -1, 1, q, vb_u), 2.0);
  C.epsI3 = detail::as_const(homogeneous_tail(euu, a, -3, q, vb_uu, ub_uu));

  C.J1 = detail::as_const(integrate_line([&](double u) { return Ko(u, 1.0); }, -a, a, q, {0.0}), 2.0);
  C.J2 = detail::as_const(homogeneous_tail(Kov, a, -5, q, vb_v, ub_v));
  C.epsJ1 = detail::as_const(integrate_line([&](double u) { return e0(u, 1.0); }, -a, a, q, {0.0}), 2.0);
  C.epsJ2 = detail::as_const(homogeneous_tail(ev, a, -3, q, vb_v, ub_v));

  // |d2K/du2| and |dK/dv| over the fundamental domain outside |u| <= ab, |v| <= b^2,
  // folded onto u, v >= 0 by parity
  QuadratureSpec qt;
  qt.abs_tol = cs.tail_tol / 8;
  auto tail = [&](auto&& f) {
    auto r1 = integrate_rect(f, Rect{0, a * b, b * b, pi / 2}, qt);
    auto r2 = integrate_rect(f, Rect{a * b, pi, 0, pi / 2}, qt);
    return Constant{4 * (r1.value + r2.value), 4 * (r1.err_est + r2.err_est)};
  };
  C.epsI4 = tail([](double u, double v) { return std::abs(eval_d2K_du2(u, v)); });
  C.epsJ3 = tail([](double u, double v) { return std::abs(eval_dK_dv(u, v)); });
  return C;
}

inline constexpr double c1_param = 8.0 / 5;
inline const double c2_param = 4 * std::numbers::sqrt2 / 5;
inline constexpr double b_param = 2.0 / 5;

inline double lemma_rhs_I(double m, double n, double c1, const LemmaConstants& C) {
  const double b = C.mc.b;
  if (m < c1 / b) throw domain_error("lemma_rhs_I: requires m >= c1/b");
  double r = n / (m * m);
  return c1 * c1 * c1 * C.I0.value * r + C.I1.value / c1 + (C.I2.value + C.I3.value) / (c1 * c1) +
         (std::pow(c1, 5) * r * C.epsI0.value + c1 * C.epsI1.value + C.epsI2.value - C.I3.value / (b * b) +
          C.epsI3.value * std::log(b * m / c1) + C.epsI4.value) /
             (m * m);
}

inline double lemma_rhs_J(double m, double n, double c2, const LemmaConstants& C) {
  const double b = C.mc.b;
  if (n < (c2 / b) * (c2 / b) * (1 - 1e-15)) throw domain_error("lemma_rhs_J: requires n >= (c2/b)^2");
  double r = m / std::sqrt(n);
  return c2 * c2 * c2 * C.J0.value * r + (C.J1.value + C.J2.value) / (c2 * c2) +
         (std::pow(c2, 5) * C.epsJ0.value * r + C.epsJ1.value - C.J2.value / (b * b) +
          C.epsJ2.value * std::log(b * std::sqrt(n) / c2) + C.epsJ3.value) /
             n;
}

/// Large-m bound with the rounded constants of the a = 2, c1 = 8/5 path.
inline double corollary_rhs1(double m, double n) {
  if (m < 4) throw domain_error("corollary_rhs1: requires m >= 4");
  double r = n / (m * m);
  return 7168.0 / 625 * r + 5 + (783.0 / 40 + 98304.0 / 3125 * r + 192 * std::log(m / 4)) / (m * m);
}

/// Large-n bound with the rounded constants of the a = 1, c2 = 4 sqrt2 / 5 path.
inline double corollary_rhs2(double m, double n) {
  if (n < 8) throw domain_error("corollary_rhs2: requires n >= 8");
  const double s2 = std::numbers::sqrt2;
  double r = m / std::sqrt(n);
  return 4832 * s2 / 3125 * r + 245.0 / 32 + (53.0 / 8 + 16384 * s2 / 15625 * r + 19 * std::log(n / 8)) / n;
}

/// rhs1 on the Red boundary n = 25 m^2 / 64.
inline double red_edge_bound(double m) { return 237.0 / 25 + (31863.0 / 1000 + 192 * std::log(m / 4)) / (m * m); }

/// rhs2 on the Blue boundary m = (8/5) sqrt n.
inline double blue_edge_bound(double n) {
  const double s2 = std::numbers::sqrt2;
  return 38656 * s2 / 15625 + 245.0 / 32 + (131072 * s2 / 78125 + 53.0 / 8 + 19 * std::log(n / 8)) / n;
}

enum class Region { red, blue, direct };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::red: return "red";
    case Region::blue: return "blue";
    default: return "direct";
  }
}

inline bool in_red(long m, long n) { return m >= 4 && 64 * n <= 25 * m * m; }
inline bool in_blue(long m, long n) { return n >= 8 && 25 * m * m <= 64 * n; }

/// Direct frequencies: 1 <= m <= 3, 1 <= n <= 7, same parity.
inline std::vector<Freq> direct_frequencies() {
  std::vector<Freq> d;
  for (int m = 1; m <= 3; ++m)
    for (int n = 1; n <= 7; ++n)
      if (parity_valid(m, n)) d.emplace_back(m, n);
  return d;
}

inline Region partition(long m, long n) {
  if (m < 1 || n < 1) throw domain_error("partition: m and n must be positive");
  if (!parity_valid(m, n)) throw parity_error("partition: mixed parity");
  if (in_red(m, n)) return Region::red;
  if (in_blue(m, n)) return Region::blue;
  if (m <= 3 && n <= 7) return Region::direct;
  throw domain_error("partition: frequency not covered");
}

/// Number of positive parity-valid pairs up to L that fall in no region.
inline long long uncovered_count(long L) {
  long long bad = 0;
  for (long m = 1; m <= L; ++m)
    for (long n = (m % 2 == 0 ? 2 : 1); n <= L; n += 2)
      if (!in_red(m, n) && !in_blue(m, n) && !(m <= 3 && n <= 7)) ++bad;
  return bad;
}

struct Check {
  std::string name;
  double value = 0;
  double bound = 0;       // required: value < bound (or value > bound when lower)
  bool lower = false;
  double err = 0;         // quadrature error attached to value
  bool pass = false;
  double margin() const { return lower ? (value - err) - bound : bound - (value + err); }
};

struct DirectValue {
  int m, n;
  double value, err;
};

struct Certificate {
  std::vector<Check> checks;
  std::vector<DirectValue> direct;
  LemmaConstants c2, c1;
  double sup_direct = 0;
  double overall_bound = 0;
  std::string config_hash;
  bool pass = false;

  const Check* find(const std::string& name) const {
    for (auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline void add_check(Certificate& cert, std::string name, double value, double bound, bool lower = false,
                      double err = 0) {
  Check c{std::move(name), value, bound, lower, err, false};
  c.pass = std::isfinite(value) && c.margin() > 0;
  cert.checks.push_back(c);
}

} // namespace detail

/// Assemble the certificate. Failures are recorded, never thrown.
inline Certificate certify_norm(const SymbolTable& khat_direct, const LemmaConstants& k2, const LemmaConstants& k1,
                                long coverage_limit = 10000) {
  Certificate cert;
  cert.c2 = k2;
  cert.c1 = k1;
  const double four_pi = 4 * pi;

  // rounded constants used by the corollary formulas
  auto up = [&](const char* n, const Constant& c, double ub) { detail::add_check(cert, n, c.value, ub, false, c.err); };
  auto lo = [&](const char* n, const Constant& c, double lb) { detail::add_check(cert, n, c.value, lb, true, c.err); };
  up("I0 < 14/5", k2.I0, 14.0 / 5);
  up("I1 < 1/2", k2.I1, 0.5);
  up("I2 < 1", k2.I2, 1.0);
  lo("I3 > 21/2", k2.I3, 10.5);
  up("I3 < 11", k2.I3, 11.0);
  up("epsI0 < 3", k2.epsI0, 3.0);
  up("epsI1 < 2", k2.epsI1, 2.0);
  up("epsI2 < 7", k2.epsI2, 7.0);
  up("epsI3 < 192", k2.epsI3, 192.0);
  up("epsI4 < 75", k2.epsI4, 75.0);
  up("J0 < 151/100", k1.J0, 1.51);
  up("J1 < 9/5", k1.J1, 1.8);
  lo("J2 > 79/10", k1.J2, 7.9);
  up("J2 < 8", k1.J2, 8.0);
  up("epsJ0 < 4/5", k1.epsJ0, 0.8);
  up("epsJ1 < 2", k1.epsJ1, 2.0);
  up("epsJ2 < 38", k1.epsJ2, 38.0);
  up("epsJ3 < 54", k1.epsJ3, 54.0);
  detail::add_check(cert, "e1(2) > 0", k2.mc.e1, 0.0, true);
  detail::add_check(cert, "e1(1) > 0", k1.mc.e1, 0.0, true);
  if (k2.a != 2.0 || k1.a != 1.0) detail::add_check(cert, "apertures are 2 and 1", 1.0, 0.0);

  // partition coverage
  detail::add_check(cert, "uncovered frequencies up to limit", static_cast<double>(uncovered_count(coverage_limit)), 0.5);

  // Red: m = 4 rows directly, then the edge bound at m = 5, 6 with monotonicity
  for (int n : {2, 4, 6}) detail::add_check(cert, "red rhs1(4," + std::to_string(n) + ")", corollary_rhs1(4, n), four_pi);
  detail::add_check(cert, "red edge m=5", red_edge_bound(5), four_pi);
  detail::add_check(cert, "red edge m=6", red_edge_bound(6), four_pi);
  {
    double worst = -1e300;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, red_edge_bound(4 + i / 1000.0) - red_edge_bound(4 + (i + 1) / 1000.0));
    detail::add_check(cert, "red edge increasing on [4,5]", worst, 0.0);
    // derivative numerator 192 - 2A - 384 log(m/4) is decreasing in m; negative at 6 suffices
    detail::add_check(cert, "red edge decreasing on [6,inf)", 192 - 2 * 31863.0 / 1000 - 384 * std::log(1.5), 0.0);
  }

  // Blue: rows 8 <= n <= 12 directly, edge bound at n = 13, 14 with monotonicity
  for (int n = 8; n <= 12; ++n) detail::add_check(cert, "blue edge n=" + std::to_string(n), blue_edge_bound(n), four_pi);
  detail::add_check(cert, "blue edge n=13", blue_edge_bound(13), four_pi);
  detail::add_check(cert, "blue edge n=14", blue_edge_bound(14), four_pi);
  {
    double worst = -1e300;
    for (int i = 0; i < 5000; ++i) worst = std::max(worst, blue_edge_bound(8 + i / 1000.0) - blue_edge_bound(8 + (i + 1) / 1000.0));
    detail::add_check(cert, "blue edge increasing on [8,13]", worst, 0.0);
    const double A = 131072 * std::numbers::sqrt2 / 78125 + 53.0 / 8;
    detail::add_check(cert, "blue edge decreasing on [14,inf)", 19 - A - 19 * std::log(14.0 / 8), 0.0);
  }

  // the computed constants give lemma bounds no larger than the corollary formulas
  {
    double worst = -1e300;
    for (int m = 4; m <= 200; ++m)
      for (int n = (m % 2 ? 1 : 2); 64 * n <= 25 * m * m; n += 2)
        worst = std::max(worst, lemma_rhs_I(m, n, c1_param, k2) - corollary_rhs1(m, n));
    for (int n = 8; n <= 400; ++n)
      for (int m = (n % 2 ? 1 : 2); 25 * m * m <= 64 * n; m += 2)
        worst = std::max(worst, lemma_rhs_J(m, n, c2_param, k1) - corollary_rhs2(m, n));
    detail::add_check(cert, "lemma rhs <= corollary rhs", worst, 1e-12);
  }

  // Direct frequencies from quadrature
  double sup = 0;
  for (auto f : direct_frequencies()) {
    double v = std::numeric_limits<double>::quiet_NaN(), e = 0;
    if (khat_direct.kernel == "Khat" && khat_direct.contains(f.m, f.n)) {
      v = khat_direct.value(f.m, f.n);
      e = khat_direct.error(f.m, f.n);
    }
    cert.direct.push_back({f.m, f.n, v, e});
    detail::add_check(cert, "direct |K^(" + std::to_string(f.m) + "," + std::to_string(f.n) + ")|", std::abs(v), four_pi,
                      false, e);
    sup = std::isfinite(v) ? std::max(sup, std::abs(v) + e) : std::numeric_limits<double>::infinity();
  }
  cert.sup_direct = sup;
  detail::add_check(cert, "direct sup < 5.8", sup, 5.8);

  double overall = sup;
  for (auto& c : cert.checks)
    if (c.name.rfind("red ", 0) == 0 || c.name.rfind("blue edge n", 0) == 0) overall = std::max(overall, c.value);
  cert.overall_bound = overall;
  cert.pass = true;
  for (auto& c : cert.checks) cert.pass = cert.pass && c.pass;
  return cert;
}

/// Direct values for the certificate by adaptive quadrature.
inline SymbolTable direct_khat_table(const QuadratureSpec& q) {
  SymbolTable t("Khat", 0.0, 7);
  for (int m = -7; m <= 7; ++m)
    for (int n = -7; n <= 7; ++n)
      if (parity_valid(m, n)) t.set(m, n, 0.0, 0.0);
  for (auto f : direct_frequencies()) {
    auto r = khat(f.m, f.n, q);
    for (int sm : {1, -1})
      for (int sn : {1, -1}) t.set(sm * f.m, sn * f.n, sm * sn * r.value, r.err_est);
  }
  return t;
}

inline nlohmann::json to_json(const Constant& c) { return {{"value", c.value}, {"err", c.err}}; }

inline nlohmann::json to_json(const LemmaConstants& C) {
  nlohmann::json j;
  j["a"] = C.a;
  j["e0"] = C.mc.e0;
  j["e1"] = C.mc.e1;
  j["I0"] = to_json(C.I0); j["I1"] = to_json(C.I1); j["I2"] = to_json(C.I2); j["I3"] = to_json(C.I3);
  j["epsI0"] = to_json(C.epsI0); j["epsI1"] = to_json(C.epsI1); j["epsI2"] = to_json(C.epsI2);
  j["epsI3"] = to_json(C.epsI3); j["epsI4"] = to_json(C.epsI4);
  j["J0"] = to_json(C.J0); j["J1"] = to_json(C.J1); j["J2"] = to_json(C.J2);
  j["epsJ0"] = to_json(C.epsJ0); j["epsJ1"] = to_json(C.epsJ1); j["epsJ2"] = to_json(C.epsJ2);
  j["epsJ3"] = to_json(C.epsJ3);
  return j;
}

inline nlohmann::json to_json(const Certificate& c) {
  nlohmann::json j;
  j["pass"] = c.pass;
  j["config_hash"] = c.config_hash;
  j["partition"] = {{"c1", c1_param}, {"c2", c2_param}, {"b", b_param},
                    {"red", "m >= 4 and 64 n <= 25 m^2"}, {"blue", "n >= 8 and 25 m^2 <= 64 n"},
                    {"direct", "1 <= m <= 3, 1 <= n <= 7, m = n mod 2"},
                    {"beyond_limit", "red and blue are closed-form inequalities: any pair with m >= 4 is red or "
                                     "has 25 m^2 <= 64 n with n >= 8; any pair with m <= 3 and n >= 8 is blue"}};
  j["constants_a2"] = to_json(c.c2);
  j["constants_a1"] = to_json(c.c1);
  auto& checks = j["checks"] = nlohmann::json::array();
  for (auto& k : c.checks)
    checks.push_back({{"name", k.name}, {"value", k.value}, {"err", k.err}, {"bound", k.bound},
                      {"kind", k.lower ? "lower" : "upper"}, {"margin", k.margin()}, {"pass", k.pass}});
  auto& d = j["direct"] = nlohmann::json::array();
  for (auto& v : c.direct) d.push_back({{"m", v.m}, {"n", v.n}, {"value", v.value}, {"err", v.err}});
  j["sup_direct"] = c.sup_direct;
  j["overall_bound"] = c.overall_bound;
  j["four_pi"] = 4 * pi;
  return j;
}

} // namespace ctn

#endif
