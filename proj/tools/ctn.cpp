// ctn: command-line driver for the multiplier tables, the norm certificate,
// the Neumann solver, the Yamabe factor and the Steklov spectrum.

#include <CLI11.hpp>
#include <json.hpp>

#include <ctn/ctn.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>

namespace fs = std::filesystem;
using namespace ctn;

namespace {

enum Exit { ok = 0, usage = 2, numeric = 3, cert_fail = 4 };

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

SymbolTable cached(const RunConfig& cfg, const std::string& kernel, double t, int M) {
  return load_or_build(cache_dir(), kernel, t, M, cfg.table, [&]() -> SymbolTable {
    if (kernel == "Khat") return build_Khat(M, cfg.table);
    if (kernel == "K0hat") return build_K0hat(M, cfg.table);
    if (kernel == "kthat") return build_kthat(t, M, cfg.table);
    if (kernel == "dkdthat") return build_dkdthat(t, M, cfg.table);
    throw table_error("unknown kernel " + kernel);
  });
}

nlohmann::json constants_key(const RunConfig& cfg, double a) {
  return {{"a", a}, {"abs_tol", cfg.abs_tol}, {"tail_tol", cfg.tail_tol}};
}

Constant const_from(const nlohmann::json& j) { return {j.at("value").get<double>(), j.at("err").get<double>()}; }

LemmaConstants constants_from_json(const nlohmann::json& j) {
  LemmaConstants C;
  C.a = j.at("a").get<double>();
  C.mc = {C.a, 0.4, j.at("e0").get<double>(), j.at("e1").get<double>()};
  C.I0 = const_from(j.at("I0")); C.I1 = const_from(j.at("I1")); C.I2 = const_from(j.at("I2"));
  C.I3 = const_from(j.at("I3"));
  C.epsI0 = const_from(j.at("epsI0")); C.epsI1 = const_from(j.at("epsI1")); C.epsI2 = const_from(j.at("epsI2"));
  C.epsI3 = const_from(j.at("epsI3")); C.epsI4 = const_from(j.at("epsI4"));
  C.J0 = const_from(j.at("J0")); C.J1 = const_from(j.at("J1")); C.J2 = const_from(j.at("J2"));
  C.epsJ0 = const_from(j.at("epsJ0")); C.epsJ1 = const_from(j.at("epsJ1")); C.epsJ2 = const_from(j.at("epsJ2"));
  C.epsJ3 = const_from(j.at("epsJ3"));
  return C;
}

LemmaConstants cached_constants(const RunConfig& cfg, double a) {
  auto key = constants_key(cfg, a);
  fs::path p = cache_dir() / ("constants_" + hex64(fnv1a(key.dump())) + ".json");
  if (fs::exists(p)) {
    std::ifstream in(p);
    try {
      auto j = nlohmann::json::parse(in);
      if (j.at("key") == key) return constants_from_json(j.at("constants"));
    } catch (const nlohmann::json::exception&) {
    }
  }
  ConstantsSpec cs;
  cs.abs_tol = cfg.abs_tol;
  cs.tail_tol = cfg.tail_tol;
  auto C = compute_constants(a, cs);
  auto os = open_out(p);
  os << nlohmann::json{{"key", key}, {"constants", to_json(C)}}.dump(2) << "\n";
  return C;
}

std::string level_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "interior_t%.6g.csv", t);
  return buf;
}

// ---- subcommands ----

int cmd_multiplier(const RunConfig& cfg) {
  auto Kh = cached(cfg, "Khat", 0, cfg.M);
  auto K0 = cached(cfg, "K0hat", 0, cfg.M);
  fs::path out(cfg.out_dir);
  save_table(out / "Khat.csv", Kh, cfg.hash());
  save_table(out / "K0hat.csv", K0, cfg.hash());
  auto e = Kh.max_abs();
  std::printf("config_hash %s\n", cfg.hash().c_str());
  std::printf("sup |K^| = %.12f at (%d,%d), 4 pi - sup = %.6f, max err %.2e\n", std::abs(e.value), e.m, e.n,
              4 * pi - std::abs(e.value), Kh.max_err());
  std::printf("K0^(0,0) = %.12f, max err %.2e\n", K0.value(0, 0), K0.max_err());
  return std::abs(e.value) < 4 * pi ? ok : numeric;
}

int cmd_certify(const RunConfig& cfg, bool report, const std::string& out_file) {
  auto Kh = cached(cfg, "Khat", 0, std::max(cfg.M, 7));
  auto k2 = cached_constants(cfg, 2.0);
  auto k1 = cached_constants(cfg, 1.0);
  auto cert = certify_norm(Kh, k2, k1);
  cert.config_hash = cfg.hash();
  auto j = to_json(cert);
  if (!out_file.empty()) {
    auto os = open_out(out_file);
    os << j.dump(2) << "\n";
  }
  if (report) {
    std::printf("%-36s %18s %12s %12s  %s\n", "check", "value", "bound", "margin", "");
    for (auto& c : cert.checks)
      std::printf("%-36s %18.10g %12.6g %12.4g  %s\n", c.name.c_str(), c.value, c.bound, c.margin(),
                  c.pass ? "ok" : "FAIL");
    std::printf("overall bound %.6f vs 4 pi = %.6f: %s\n", cert.overall_bound, 4 * pi, cert.pass ? "PASS" : "FAIL");
  } else if (out_file.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("certificate %s (%s)\n", cert.pass ? "PASS" : "FAIL", out_file.c_str());
  }
  return cert.pass ? ok : cert_fail;
}

int cmd_solve(const RunConfig& cfg, const std::string& input) {
  std::ifstream in(input);
  if (!in) throw Usage("cannot open " + input);
  BoundaryData h{read_boundary_csv(in, input), DataKind::neumann_datum};
  const int N = h.grid.N;
  const int M = std::min(cfg.M, N / 2 - 1);
  const std::string hash = cfg.hash();

  auto Kh = cached(cfg, "Khat", 0, M);
  auto K0 = cached(cfg, "K0hat", 0, M);
  auto sol = solve(h, Kh, cfg.max_discarded);
  auto hhat = project(h.grid, M).spectrum;

  std::vector<double> levels = cfg.t_levels;
  std::sort(levels.begin(), levels.end());
  // level tables are independent; build them concurrently, consume in order
  std::vector<std::future<SymbolTable>> kt;
  std::vector<SymbolTable> ktabs;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (kt.size() >= static_cast<std::size_t>(cfg.threads)) {
      ktabs.push_back(kt.front().get());
      kt.erase(kt.begin());
    }
    kt.push_back(std::async(cfg.threads > 1 ? std::launch::async : std::launch::deferred,
                            [&, t = levels[i]] { return cached(cfg, "kthat", t, M); }));
  }
  for (auto& f : kt) ktabs.push_back(f.get());
  auto dk = cached(cfg, "dkdthat", levels.front(), M);

  fs::path out(cfg.out_dir);
  {
    auto os = open_out(out / "density.csv");
    write_grid_csv(os, sol.density.grid, hash);
  }
  {
    auto os = open_out(out / "density_spectrum.csv");
    write_spectrum_csv(os, sol.spectrum, hash);
  }
  {
    auto tr = trace_S(sol.spectrum, K0);
    auto os = open_out(out / "trace.csv");
    write_grid_csv(os, inverse_transform(rebanded(tr, N / 2 - 1), N), hash);
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto s = interior_eval(sol.spectrum, ktabs[i]);
    auto os = open_out(out / level_name(levels[i]));
    write_grid_csv(os, inverse_transform(rebanded(s, N / 2 - 1), N), hash);
  }

  auto rel = [&](const Spectrum& a, const Spectrum& b) {
    double num = 0, den = b.l2_sq();
    b.for_each([&](int m, int n, cplx z) { num += std::norm(a(m, n) - z); });
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  };
  double round_trip = rel(apply_neumann(sol.spectrum, Kh), hhat);
  double jump = rel(normal_derivative(sol.spectrum, dk), hhat);
  nlohmann::json summary = {{"config_hash", hash},
                            {"N", N},
                            {"M", M},
                            {"discarded_fraction", sol.discarded_fraction},
                            {"round_trip_rel_l2", round_trip},
                            {"jump_t", levels.front()},
                            {"jump_rel_l2", jump},
                            {"levels", levels}};
  auto os = open_out(out / "summary.json");
  os << summary.dump(2) << "\n";
  std::printf("config_hash %s\nN %d, M %d, discarded fraction %.3e\nround trip rel L2 %.3e\n", hash.c_str(), N, M,
              sol.discarded_fraction, round_trip);
  std::printf("jump relation rel L2 at t = %g: %.3e\n", levels.front(), jump);
  return ok;
}

int cmd_yamabe(const RunConfig& cfg, double r0, double r1, int count) {
  if (count < 2 || !(r0 > 0) || !(r1 < pi) || !(r0 < r1)) throw Usage("yamabe: need 0 < r-min < r-max < pi, count >= 2");
  auto os = open_out(fs::path(cfg.out_dir) / "yamabe.csv");
  write_yamabe_header(os, cfg.hash());
  double worst = 0;
  for (int i = 0; i < count; ++i) {
    double r = r0 + (r1 - r0) * i / (count - 1), x = std::cos(r);
    double res = ode_residual(x);
    worst = std::max(worst, std::abs(res));
    os << fmt(r) << "," << fmt(x) << "," << fmt(yamabe_radial(r)) << "," << fmt(res) << "\n";
  }
  std::printf("config_hash %s\nmax |ode residual| %.3e over %d radii\n", cfg.hash().c_str(), worst, count);
  return ok;
}

int cmd_steklov(const RunConfig& cfg) {
  auto Kh = cached(cfg, "Khat", 0, cfg.M);
  auto K0 = cached(cfg, "K0hat", 0, cfg.M);
  auto modes = steklov_modes(Kh, K0, cfg.M);
  auto os = open_out(fs::path(cfg.out_dir) / "steklov.csv");
  write_hash_line(os, cfg.hash());
  os << "m,n,nu\n";
  for (auto& s : modes) os << s.m << "," << s.n << "," << fmt(s.nu) << "\n";
  auto e = extremal_steklov(modes);
  std::printf("config_hash %s\n%zu modes; smallest |nu| = %.10f at (%d,%d)\n", cfg.hash().c_str(), modes.size(),
              std::abs(e.nu), e.m, e.n);
  return ok;
}

int cmd_selftest() {
  int fails = 0;
  auto check = [&](const char* name, bool pass, double value) {
    std::printf("%-48s %-4s %.3e\n", name, pass ? "ok" : "FAIL", value);
    fails += !pass;
  };
  {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    Spectrum s(7);
    s.for_each_mut([&](int, int, cplx& z) { z = {nd(rng), nd(rng)}; });
    auto back = forward_transform(inverse_transform(s, 32));
    double e = 0;
    s.for_each([&](int m, int n, cplx z) { e = std::max(e, std::abs(z - back(m, n))); });
    check("transform round trip", e < 1e-12, e);
  }
  {
    auto tbl = build_Khat(8);
    QuadratureSpec q;
    double e = std::abs(tbl.value(1, 1) - khat(1, 1, q).value);
    check("K^(1,1) table vs adaptive", e < 1e-8, e);
    check("sup |K^| < 4 pi on |m|,|n| <= 8", std::abs(tbl.max_abs().value) < 4 * pi, std::abs(tbl.max_abs().value));
    Spectrum h(8);
    h(1, 1) = 1;
    h(-1, -1) = 1;
    h(2, 0) = 0.5;
    h(-2, 0) = 0.5;
    auto f = invert_neumann(h, tbl);
    auto back = apply_neumann(f, tbl);
    double r = 0;
    h.for_each([&](int m, int n, cplx z) { r = std::max(r, std::abs(back(m, n) - z)); });
    check("solve round trip", r < 1e-12, r);
  }
  check("partition covers 1 <= m,n <= 2000", uncovered_count(2000) == 0, static_cast<double>(uncovered_count(2000)));
  check("red edge at m = 5, 6 below 4 pi", red_edge_bound(5) < 4 * pi && red_edge_bound(6) < 4 * pi, red_edge_bound(6));
  check("blue edge at n = 13, 14 below 4 pi", blue_edge_bound(13) < 4 * pi && blue_edge_bound(14) < 4 * pi,
        blue_edge_bound(14));
  {
    double x = 0.9, a = 1, b = std::sqrt(1 - x);
    for (int i = 0; i < 40; ++i) {
      double an = (a + b) / 2;
      b = std::sqrt(a * b);
      a = an;
    }
    double e = std::abs(f21_half(x) - 1 / a);
    check("2F1 vs AGM at x = 0.9", e < 1e-12, e);
    check("ODE residual at x = -0.5", std::abs(ode_residual(-0.5)) < 1e-12, std::abs(ode_residual(-0.5)));
  }
  {
    QuadratureSpec q;
    double m1 = dkdt_mass(0.02, q).value, m2 = dkdt_mass(0.01, q).value;
    check("dk/dt mass tends to -1/2", std::abs(m2 + 0.5) < std::abs(m1 + 0.5), std::abs(m2 + 0.5));
  }
  return fails == 0 ? ok : numeric;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann problem on the CR sphere: symbols, certificate, solver"};
  app.require_subcommand(1);
  std::string config_file, out_dir;
  app.add_option("--config", config_file, "key = value file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");

  std::optional<int> max_freq, threads;
  std::optional<double> abs_tol;
  std::vector<double> t_levels;
  bool report = false;
  std::string cert_out, input;
  double r_min = 0.1, r_max = pi - 0.1;
  int r_count = 64;

  auto* mult = app.add_subcommand("multiplier", "build and store the K^ and K0^ tables");
  mult->add_option("--max-freq", max_freq, "cutoff M");
  auto* cert = app.add_subcommand("certify", "certificate for sup |K^| < 4 pi");
  cert->add_flag("--report", report, "human-readable margins");
  cert->add_option("--output", cert_out, "certificate JSON path");
  cert->add_option("--max-freq", max_freq, "cutoff of the cached K^ table");
  auto* solv = app.add_subcommand("solve", "density, trace and interior values for a Neumann datum");
  solv->add_option("--input", input, "boundary CSV u,v,h")->required();
  solv->add_option("--t-levels", t_levels, "interior levels")->delimiter(',');
  solv->add_option("--max-freq", max_freq, "cutoff M");
  auto* yam = app.add_subcommand("yamabe", "radial factor and ODE residual on an r grid");
  yam->add_option("--r-min", r_min);
  yam->add_option("--r-max", r_max);
  yam->add_option("--count", r_count);
  auto* stek = app.add_subcommand("steklov", "Dirichlet-to-Neumann ratios per frequency class");
  stek->add_option("--max-freq", max_freq, "cutoff M");
  auto* self = app.add_subcommand("selftest", "quick invariant checks");
  for (auto* s : {mult, cert, solv, yam, stek, self}) {
    s->add_option("--threads", threads);
    s->add_option("--abs-tol", abs_tol);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (max_freq) {
      if (*max_freq < 1) throw Usage("--max-freq must be >= 1");
      cfg.M = *max_freq;
    }
    if (threads) cfg.threads = *threads;
    if (abs_tol) cfg.abs_tol = *abs_tol;
    if (!t_levels.empty()) cfg.t_levels = t_levels;
    cfg.validate();

    if (*mult) return cmd_multiplier(cfg);
    if (*cert) return cmd_certify(cfg, report, cert_out);
    if (*solv) return cmd_solve(cfg, input);
    if (*yam) return cmd_yamabe(cfg, r_min, r_max, r_count);
    if (*stek) return cmd_steklov(cfg);
    if (*self) return cmd_selftest();
  } catch (const Usage& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return usage;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return numeric;
  }
  return usage;
}
