#ifndef CTN_NEUMANN_HPP
#define CTN_NEUMANN_HPP

// Boundary data -> density -> single layer potential inside the collar, plus
// the jump relation, the polar form of L and the Steklov spectrum.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "kernels.hpp"
#include "multiplier.hpp"
#include "quadrature.hpp"
#include "torus.hpp"

namespace ctn {

enum class DataKind { neumann_datum, density, trace };

struct BoundaryData {
  GridFn grid;
  DataKind kind = DataKind::neumann_datum;
};

struct Projection {
  Spectrum spectrum;
  double discarded_fraction = 0;  // energy outside the kept band, relative
};

/// Project samples onto the parity-valid band |m|,|n| <= M.
inline Projection project(const GridFn& g, int M) {
  if (M < 0) throw domain_error("project: negative band");
  auto full = forward_transform(g, -1.0);
  Projection p{rebanded(full, std::min(M, full.band())), 0.0};
  double h2 = (2 * pi / g.N) * (2 * pi / g.N);
  double total = 0;
  for (auto& z : g.samples) total += std::norm(z);
  total *= h2 / 2;  // the square cover holds two fundamental domains
  double kept = p.spectrum.l2_sq() / two_pi_sq;
  p.discarded_fraction = total > 0 ? std::max(0.0, (total - kept) / total) : 0.0;
  return p;
}

struct SolveResult {
  BoundaryData density;
  Spectrum spectrum;
  double discarded_fraction = 0;
};

/// f = (-I/2 + N)^{-1} h for sampled h.
inline SolveResult solve(const BoundaryData& h, const SymbolTable& Khat, double max_discarded = 1e-8) {
  if (h.kind != DataKind::neumann_datum) throw domain_error("solve: expected a Neumann datum");
  auto p = project(h.grid, std::min(Khat.M, h.grid.N / 2 - 1));
  if (p.discarded_fraction > max_discarded)
    throw domain_error("solve: discarded energy fraction " + std::to_string(p.discarded_fraction) +
                       " exceeds the configured limit");
  SolveResult r;
  r.spectrum = invert_neumann(p.spectrum, Khat);
  r.density = {inverse_transform(rebanded(r.spectrum, h.grid.N / 2 - 1), h.grid.N), DataKind::density};
  r.discarded_fraction = p.discarded_fraction;
  return r;
}

/// Tr S f: modewise multiplication by (sqrt2 / 8 pi) K0^.
inline Spectrum trace_S(const Spectrum& f, const SymbolTable& K0hat) {
  detail::require_within(f, K0hat.M, "trace_S");
  auto tau = trace_symbol(K0hat);
  Spectrum r(std::min(f.band(), K0hat.M));
  r.for_each_mut([&](int m, int n, cplx& z) { z = f(m, n) * tau(m, n); });
  return r;
}

inline BoundaryData trace_S(const BoundaryData& f, const SymbolTable& K0hat) {
  int B = std::min(K0hat.M, f.grid.N / 2 - 1);
  auto s = trace_S(project(f.grid, B).spectrum, K0hat);
  return {inverse_transform(rebanded(s, f.grid.N / 2 - 1), f.grid.N), DataKind::trace};
}

/// Anisotropic weight 1 + |m| + |n|^{1/2}.
inline double sobolev_weight(int m, int n) { return 1 + std::abs(m) + std::sqrt(std::abs(n)); }

/// ||F||_s^2 = (1 / 2pi^2) sum w(m,n)^{2s} |F^(m,n)|^2.
inline double sobolev_norm(const Spectrum& s, double order) {
  double r = 0;
  s.for_each([&](int m, int n, cplx z) { r += std::pow(sobolev_weight(m, n), 2 * order) * std::norm(z); });
  return std::sqrt(r / two_pi_sq);
}

/// max over the table of |trace symbol| * w(m,n).
inline double trace_gain_bound(const SymbolTable& K0hat) {
  auto tau = trace_symbol(K0hat);
  double r = 0;
  for (int m = -K0hat.M; m <= K0hat.M; ++m)
    for (int n = -K0hat.M; n <= K0hat.M; ++n)
      if (parity_valid(m, n)) r = std::max(r, std::abs(tau(m, n)) * sobolev_weight(m, n));
  return r;
}

/// Sf at level t: (sqrt2 / 8 pi) k^_{t/sqrt2} f^.
inline Spectrum interior_eval(const Spectrum& f, const SymbolTable& kthat) {
  require_kernel(kthat, "kthat");
  detail::require_within(f, kthat.M, "interior_eval");
  Spectrum r(std::min(f.band(), kthat.M));
  const double c = std::numbers::sqrt2 / (8 * pi);
  r.for_each_mut([&](int m, int n, cplx& z) { z = c * kthat.value(m, n) * f(m, n); });
  return r;
}

/// d/dt Sf along the normal curves: (1 / 8 pi) (dk/dt)^ f^.
inline Spectrum normal_derivative(const Spectrum& f, const SymbolTable& dkdthat) {
  require_kernel(dkdthat, "dkdthat");
  detail::require_within(f, dkdthat.M, "normal_derivative");
  Spectrum r(std::min(f.band(), dkdthat.M));
  r.for_each_mut([&](int m, int n, cplx& z) { z = dkdthat.value(m, n) / (8 * pi) * f(m, n); });
  return r;
}

/// Tables keyed by (kernel, t, M), built on first use.
class TableCache {
 public:
  explicit TableCache(TableSpec spec = {}) : spec_(spec) {}

  const SymbolTable& kthat(double t, int M) { return get("kthat", t, M); }
  const SymbolTable& dkdthat(double t, int M) { return get("dkdthat", t, M); }

  const SymbolTable& get(const std::string& kernel, double t, int M) {
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_tuple(kernel, t, M);
    auto it = tables_.find(key);
    if (it != tables_.end()) return *it->second;
    std::unique_ptr<SymbolTable> tbl;
    if (kernel == "kthat") tbl = std::make_unique<SymbolTable>(build_kthat(t, M, spec_));
    else if (kernel == "dkdthat") tbl = std::make_unique<SymbolTable>(build_dkdthat(t, M, spec_));
    else if (kernel == "Khat") tbl = std::make_unique<SymbolTable>(build_Khat(M, spec_));
    else if (kernel == "K0hat") tbl = std::make_unique<SymbolTable>(build_K0hat(M, spec_));
    else throw table_error("TableCache: unknown kernel " + kernel);
    return *tables_.emplace(key, std::move(tbl)).first->second;
  }

  void insert(SymbolTable tbl) {
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_tuple(tbl.kernel, tbl.t, tbl.M);
    tables_[key] = std::make_unique<SymbolTable>(std::move(tbl));
  }

 private:
  TableSpec spec_;
  std::mutex mu_;
  std::map<std::tuple<std::string, double, int>, std::unique_ptr<SymbolTable>> tables_;
};

struct InteriorField {
  std::vector<double> levels;
  std::vector<GridFn> values;
};

/// Sf on an N x N grid at each level.
inline InteriorField interior_field(const Spectrum& f, const std::vector<double>& levels, TableCache& cache, int N) {
  InteriorField F;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    double t = levels[i];
    if (!(t > 0) || t > level_max) throw domain_error("interior_field: level outside (0, pi/4]");
    if (i > 0 && !(t > levels[i - 1])) throw domain_error("interior_field: levels must increase");
    auto s = interior_eval(f, cache.kthat(t, f.band()));
    F.levels.push_back(t);
    F.values.push_back(inverse_transform(rebanded(s, N / 2 - 1), N));
  }
  return F;
}

/// Sf at (t,u,v) by direct quadrature of the convolution; F is the density as a function.
template <class Fn>
IntegralResult interior_direct(Fn&& F, double t, TorusPoint p, const QuadratureSpec& spec) {
  if (!(t > 0) || t > level_max) throw domain_error("interior_direct: t outside (0, pi/4]");
  const double tau = t / std::numbers::sqrt2;
  auto r = integrate_rect(
      [&](double u, double v) {
        double kp = eval_k(tau, u, v), km = eval_k(tau, -u, v);
        return (F(p.u - u, p.v - v) + F(p.u + u, p.v + v)) * kp + (F(p.u + u, p.v - v) + F(p.u - u, p.v + v)) * km;
      },
      Rect{0, pi, 0, pi / 2}, spec, Corner::lower_left);
  const double c = std::numbers::sqrt2 / (8 * pi);
  return {c * r.value, c * r.err_est, r.panels};
}

/// Sf evaluated pointwise at any level; one table per distinct t.
class SpectralField {
 public:
  SpectralField(Spectrum f, TableCache& cache) : f_(std::move(f)), cache_(&cache) {}

  double operator()(double t, double u, double v) const {
    auto s = interior_eval(f_, cache_->kthat(t, f_.band()));
    return synthesize(s, u, v).real();
  }

 private:
  Spectrum f_;
  TableCache* cache_;
};

struct PolarPoint {
  double r, u7, v7;
};

inline PolarPoint collar_to_polar(double t, double u, double v) { return {pi / 2 - std::numbers::sqrt2 * t, v, u}; }
inline PolarPoint collar_to_polar(const CollarPoint& c) { return collar_to_polar(c.t, c.p.u, c.p.v); }

/// (t, u, v) from polar coordinates.
inline std::array<double, 3> polar_to_collar(const PolarPoint& p) {
  return {(pi / 2 - p.r) / std::numbers::sqrt2, p.v7, p.u7};
}

/// zeta^1 = e^{i(u+v)} sin(r/2), zeta^2 = e^{i(u-v)} cos(r/2).
inline SpherePoint polar_chart(const PolarPoint& p) {
  return {std::sin(p.r / 2) * std::polar(1.0, p.u7 + p.v7), std::cos(p.r / 2) * std::polar(1.0, p.u7 - p.v7)};
}

/// L w at a collar point, w given as a function of (t,u,v), by centred differences in (r, u7, v7).
template <class Field>
double L_residual(Field&& w, double t, TorusPoint c, double h) {
  if (!(h > 0)) throw domain_error("L_residual: step must be positive");
  const double dt = 2 * h / std::numbers::sqrt2;
  if (!(t - dt > 0) || t + dt > level_max) throw domain_error("L_residual: stencil leaves the collar");
  PolarPoint p = collar_to_polar(t, c.u, c.v);
  auto W = [&](double dr, double du, double dv) {
    auto q = polar_to_collar({p.r + dr, p.u7 + du, p.v7 + dv});
    return w(q[0], q[1], q[2]);
  };
  const double w0 = W(0, 0, 0);
  const double wrr = (W(h, 0, 0) - 2 * w0 + W(-h, 0, 0)) / (h * h);
  const double wr = (W(h, 0, 0) - W(-h, 0, 0)) / (2 * h);
  const double wuu = (W(0, h, 0) - 2 * w0 + W(0, -h, 0)) / (h * h);
  const double wvv = (W(0, 0, h) - 2 * w0 + W(0, 0, -h)) / (h * h);
  const double wuv = (W(0, h, h) - W(0, h, -h) - W(0, -h, h) + W(0, -h, -h)) / (4 * h * h);
  const double ct = std::cos(p.r) / std::sin(p.r), cs = 1 / std::sin(p.r);
  return -2 * wrr - 0.5 * ct * ct * wuu - 0.5 * cs * cs * wvv - ct * cs * wuv - 2 * ct * wr + 0.5 * w0;
}

template <class Field>
double L_residual(Field&& w, const CollarPoint& c, double h) {
  return L_residual(std::forward<Field>(w), c.t, c.p, h);
}

/// Least-squares fit y = L + sum_k a_k t^p_k; returns L. The default powers model the kernel mass;
/// the jump relation converges like t, so fit it with {1, 2}.
inline double extrapolate_to_zero(const std::vector<double>& t, const std::vector<double>& y,
                                  const std::vector<double>& powers = {0.5, 1.0}) {
  if (t.size() != y.size() || t.size() < powers.size() + 1)
    throw domain_error("extrapolate_to_zero: need more samples than fitted terms");
  for (double p : powers)
    if (!(p > 0)) throw domain_error("extrapolate_to_zero: powers must be positive");
  Eigen::MatrixXd A(t.size(), powers.size() + 1);
  Eigen::VectorXd b(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    A(i, 0) = 1;
    for (std::size_t k = 0; k < powers.size(); ++k) A(i, k + 1) = std::pow(t[i], powers[k]);
    b(i) = y[i];
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

struct SteklovMode {
  int m, n;
  double nu;
};

/// Dirichlet-to-Neumann ratios sigma / trace symbol, one per class {(m,n), (-m,-n)}, sorted by nu.
inline std::vector<SteklovMode> steklov_modes(const SymbolTable& Khat, const SymbolTable& K0hat, int M) {
  if (M < 1 || M > Khat.M || M > K0hat.M) throw table_error("steklov_modes: tables do not reach the cutoff");
  auto nu = dtn_symbol(Khat, K0hat);
  std::vector<SteklovMode> out;
  for (int m = 0; m <= M; ++m)
    for (int n = -M; n <= M; ++n) {
      if (!parity_valid(m, n) || (m == 0 && n < 0)) continue;
      out.push_back({m, n, nu(m, n)});
    }
  std::stable_sort(out.begin(), out.end(), [](const SteklovMode& a, const SteklovMode& b) { return a.nu < b.nu; });
  return out;
}

/// The mode with the smallest |nu|; the only end of the spectrum that does not move with the cutoff.
inline SteklovMode extremal_steklov(const std::vector<SteklovMode>& modes) {
  if (modes.empty()) throw domain_error("extremal_steklov: no modes");
  return *std::min_element(modes.begin(), modes.end(),
                           [](const SteklovMode& a, const SteklovMode& b) { return std::abs(a.nu) < std::abs(b.nu); });
}

} // namespace ctn

#endif
