#ifndef CTN_IO_HPP
#define CTN_IO_HPP

// CSV/JSON persistence, run configuration and the on-disk table cache.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "multiplier.hpp"
#include "torus.hpp"

namespace ctn {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Round-trippable decimal.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string spec_hash(const TableSpec& s) {
  std::string c;
  for (auto* g : {&s.fine, &s.coarse})
    c += std::to_string(g->order) + "," + std::to_string(g->layers) + "," + fmt(g->x0) + "," + fmt(g->hmax) + ";";
  return hex64(fnv1a(c));
}

struct RunConfig {
  int N = 256;
  int M = 64;
  double abs_tol = 1e-9;
  double tail_tol = 1e-7;
  std::vector<double> t_levels{0.02, 0.01, 0.005};
  double max_discarded = 1e-8;
  int threads = 1;
  std::string out_dir = "out";
  TableSpec table;

  /// Every numeric setting in a fixed order; the output directory is not part of the run.
  std::string canonical() const {
    std::string s = "N=" + std::to_string(N) + ";M=" + std::to_string(M) + ";abs_tol=" + fmt(abs_tol) +
                    ";tail_tol=" + fmt(tail_tol) + ";max_discarded=" + fmt(max_discarded) +
                    ";threads=" + std::to_string(threads) + ";t_levels=";
    for (double t : t_levels) s += fmt(t) + ",";
    for (auto* g : {&table.fine, &table.coarse})
      s += ";rule=" + std::to_string(g->order) + "," + std::to_string(g->layers) + "," + fmt(g->x0) + "," +
           fmt(g->hmax);
    return s;
  }
  std::string hash() const { return hex64(fnv1a(canonical())); }

  void validate() const {
    if (N < 8 || N % 2 != 0) throw parse_error("config: N must be even and >= 8");
    if (M < 1) throw parse_error("config: M must be >= 1");
    if (!(abs_tol > 0) || !(tail_tol > 0)) throw parse_error("config: tolerances must be positive");
    if (threads < 1) throw parse_error("config: threads must be >= 1");
    for (double t : t_levels)
      if (!(t > 0) || t > level_max) throw parse_error("config: t level outside (0, pi/4]");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline std::vector<double> parse_list(const std::string& v, const std::string& where) {
  std::vector<double> r;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double x;
    if (!parse_double(item, x)) throw parse_error(where + ": bad number '" + trim(item) + "'");
    r.push_back(x);
  }
  return r;
}

} // namespace detail

/// Apply `key = value` lines; '#' starts a comment.
inline void apply_config(RunConfig& c, std::istream& in, const std::string& source) {
  std::string line;
  for (int ln = 1; std::getline(in, line); ++ln) {
    auto hashpos = line.find('#');
    if (hashpos != std::string::npos) line.resize(hashpos);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::string where = source + ":" + std::to_string(ln);
    if (eq == std::string::npos) throw parse_error(where + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq)), val = detail::trim(line.substr(eq + 1));
    auto num = [&] {
      double x;
      if (!detail::parse_double(val, x)) throw parse_error(where + ": bad value for " + key);
      return x;
    };
    auto integer = [&] {
      double x = num();
      if (x != std::floor(x)) throw parse_error(where + ": " + key + " must be an integer");
      return static_cast<int>(x);
    };
    if (key == "N") c.N = integer();
    else if (key == "M") c.M = integer();
    else if (key == "abs_tol") c.abs_tol = num();
    else if (key == "tail_tol") c.tail_tol = num();
    else if (key == "max_discarded") c.max_discarded = num();
    else if (key == "threads") c.threads = integer();
    else if (key == "t_levels") c.t_levels = detail::parse_list(val, where);
    else if (key == "out_dir") c.out_dir = val;
    else if (key == "rule_order") c.table.fine.order = integer();
    else if (key == "rule_layers") c.table.fine.layers = integer();
    else throw parse_error(where + ": unknown key '" + key + "'");
  }
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file " + path);
  apply_config(c, in, path);
}

// ---- CSV ----

struct CsvRows {
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;  // source line of each row
  std::string config_hash;
};

/// Numeric CSV with a fixed header; '#' lines are metadata. Errors name row and column.
inline CsvRows read_csv(std::istream& in, const std::vector<std::string>& header, const std::string& source) {
  CsvRows out;
  std::string line;
  int ln = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto p = line.find("config_hash=");
      if (p != std::string::npos) out.config_hash = detail::trim(line.substr(p + 12));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      for (auto& c : cells) c = detail::trim(c);
      if (cells != header) {
        std::string want;
        for (auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw parse_error(source + ": row " + std::to_string(ln) + ": expected header '" + want + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != header.size())
      throw parse_error(source + ": row " + std::to_string(ln) + ": expected " + std::to_string(header.size()) +
                        " columns, found " + std::to_string(cells.size()));
    std::vector<double> r(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      if (!detail::parse_double(cells[j], r[j]) || !std::isfinite(r[j]))
        throw parse_error(source + ": row " + std::to_string(ln) + ", column " + std::to_string(j + 1) + " (" +
                          header[j] + "): not a finite number: '" + detail::trim(cells[j]) + "'");
    out.rows.push_back(std::move(r));
    out.lines.push_back(ln);
  }
  if (!have_header) throw parse_error(source + ": empty file");
  return out;
}

inline void write_hash_line(std::ostream& os, const std::string& hash) {
  if (!hash.empty()) os << "# config_hash=" << hash << "\n";
}

inline void write_grid_csv(std::ostream& os, const GridFn& g, const std::string& hash = {}) {
  write_hash_line(os, hash);
  os << "u,v,re,im\n";
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k)
      os << fmt(g.coord(j)) << "," << fmt(g.coord(k)) << "," << fmt(g.at(j, k).real()) << "," << fmt(g.at(j, k).imag())
         << "\n";
}

namespace detail {

inline int grid_index(double x, int N, const std::string& source, int line, int col, const char* name) {
  double s = (x + pi) * N / (2 * pi);
  double r = std::round(s);
  if (std::abs(s - r) > 1e-6 || r < 0 || r >= N)
    throw parse_error(source + ": row " + std::to_string(line) + ", column " + std::to_string(col) + " (" + name +
                      "): not a square-cover grid coordinate");
  return static_cast<int>(r);
}

inline int square_size(std::size_t rows, const std::string& source) {
  int N = static_cast<int>(std::llround(std::sqrt(static_cast<double>(rows))));
  if (static_cast<std::size_t>(N) * N != rows || N % 2 != 0 || N == 0)
    throw parse_error(source + ": row count " + std::to_string(rows) + " is not N^2 for an even N");
  return N;
}

template <class Set>
GridFn rows_to_grid(const CsvRows& c, const std::string& source, Set&& set) {
  int N = square_size(c.rows.size(), source);
  GridFn g(N);
  std::vector<char> seen(static_cast<std::size_t>(N) * N, 0);
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    int j = grid_index(c.rows[i][0], N, source, c.lines[i], 1, "u");
    int k = grid_index(c.rows[i][1], N, source, c.lines[i], 2, "v");
    auto& s = seen[static_cast<std::size_t>(j) * N + k];
    if (s) throw parse_error(source + ": row " + std::to_string(c.lines[i]) + ": duplicate grid point");
    s = 1;
    set(g.at(j, k), c.rows[i]);
  }
  return g;
}

} // namespace detail

inline GridFn read_grid_csv(std::istream& in, const std::string& source) {
  auto c = read_csv(in, {"u", "v", "re", "im"}, source);
  return detail::rows_to_grid(c, source, [](cplx& z, const std::vector<double>& r) { z = {r[2], r[3]}; });
}

/// Boundary datum samples `u,v,h` on the N x N square-cover grid.
inline GridFn read_boundary_csv(std::istream& in, const std::string& source) {
  auto c = read_csv(in, {"u", "v", "h"}, source);
  return detail::rows_to_grid(c, source, [](cplx& z, const std::vector<double>& r) { z = r[2]; });
}

inline void write_boundary_csv(std::ostream& os, const GridFn& g, const std::string& hash = {}) {
  write_hash_line(os, hash);
  os << "u,v,h\n";
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k)
      os << fmt(g.coord(j)) << "," << fmt(g.coord(k)) << "," << fmt(g.at(j, k).real()) << "\n";
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s, const std::string& hash = {}) {
  write_hash_line(os, hash);
  os << "m,n,re,im\n";
  s.for_each([&](int m, int n, cplx z) { os << m << "," << n << "," << fmt(z.real()) << "," << fmt(z.imag()) << "\n"; });
}

inline Spectrum read_spectrum_csv(std::istream& in, const std::string& source) {
  auto c = read_csv(in, {"m", "n", "re", "im"}, source);
  int B = 0;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    for (int j = 0; j < 2; ++j) {
      double x = c.rows[i][j];
      if (x != std::floor(x))
        throw parse_error(source + ": row " + std::to_string(c.lines[i]) + ", column " + std::to_string(j + 1) +
                          ": frequency must be an integer");
      B = std::max(B, static_cast<int>(std::abs(x)));
    }
  Spectrum s(B);
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    int m = static_cast<int>(c.rows[i][0]), n = static_cast<int>(c.rows[i][1]);
    if (!parity_valid(m, n))
      throw parse_error(source + ": row " + std::to_string(c.lines[i]) + ": mixed-parity frequency");
    s(m, n) = {c.rows[i][2], c.rows[i][3]};
  }
  return s;
}

inline nlohmann::json table_meta(const SymbolTable& t, const std::string& hash = {}) {
  return {{"kernel", t.kernel}, {"t", t.t}, {"M", t.M}, {"spec_hash", t.spec_hash}, {"config_hash", hash}};
}

inline void write_table_csv(std::ostream& os, const SymbolTable& t, const std::string& hash = {}) {
  write_hash_line(os, hash);
  os << "m,n,value,err\n";
  t.for_each([&](int m, int n, double v, double e) { os << m << "," << n << "," << fmt(v) << "," << fmt(e) << "\n"; });
}

inline SymbolTable read_table_csv(std::istream& in, const nlohmann::json& meta, const std::string& source) {
  SymbolTable t;
  try {
    t = SymbolTable(meta.at("kernel").get<std::string>(), meta.at("t").get<double>(), meta.at("M").get<int>());
    t.spec_hash = meta.value("spec_hash", "");
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(source + ": bad sidecar: " + e.what());
  }
  auto c = read_csv(in, {"m", "n", "value", "err"}, source);
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    double m = c.rows[i][0], n = c.rows[i][1];
    if (m != std::floor(m) || n != std::floor(n) || !t.contains(static_cast<int>(m), static_cast<int>(n)))
      throw parse_error(source + ": row " + std::to_string(c.lines[i]) + ": frequency outside the table");
    t.set(static_cast<int>(m), static_cast<int>(n), c.rows[i][2], c.rows[i][3]);
  }
  bool complete = true;
  t.for_each([&](int, int, double v, double) { complete = complete && !std::isnan(v); });
  if (!complete) throw parse_error(source + ": table has missing entries");
  return t;
}

inline void save_table(const std::filesystem::path& csv, const SymbolTable& t, const std::string& hash = {}) {
  std::filesystem::create_directories(csv.parent_path().empty() ? "." : csv.parent_path());
  {
    std::ofstream os(csv);
    if (!os) throw parse_error("cannot write " + csv.string());
    write_table_csv(os, t, hash);
  }
  auto side = csv;
  side.replace_extension(".json");
  std::ofstream js(side);
  if (!js) throw parse_error("cannot write " + side.string());
  js << table_meta(t, hash).dump(2) << "\n";
}

inline SymbolTable load_table(const std::filesystem::path& csv) {
  auto side = csv;
  side.replace_extension(".json");
  std::ifstream js(side), in(csv);
  if (!js || !in) throw parse_error("cannot open table " + csv.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(side.string() + ": " + e.what());
  }
  return read_table_csv(in, meta, csv.string());
}

/// Cache directory from CTN_CACHE_DIR, else `.ctn-cache` under the working directory.
inline std::filesystem::path cache_dir() {
  const char* e = std::getenv("CTN_CACHE_DIR");
  return (e && *e) ? std::filesystem::path(e) : std::filesystem::path(".ctn-cache");
}

inline std::filesystem::path table_path(const std::filesystem::path& dir, const std::string& kernel, double t, int M,
                                        const TableSpec& spec) {
  return dir / (kernel + "_t" + fmt(t) + "_M" + std::to_string(M) + "_" + spec_hash(spec) + ".csv");
}

/// Load a table from the cache or build and store it.
inline SymbolTable load_or_build(const std::filesystem::path& dir, const std::string& kernel, double t, int M,
                                 const TableSpec& spec, const std::function<SymbolTable()>& build,
                                 bool* from_cache = nullptr) {
  auto p = table_path(dir, kernel, t, M, spec);
  if (std::filesystem::exists(p)) {
    auto tbl = load_table(p);
    if (tbl.kernel != kernel || tbl.M != M) throw table_error(p.string() + ": cached table does not match its name");
    if (from_cache) *from_cache = true;
    return tbl;
  }
  auto tbl = build();
  tbl.spec_hash = spec_hash(spec);
  save_table(p, tbl);
  if (from_cache) *from_cache = false;
  return tbl;
}

inline void write_yamabe_header(std::ostream& os, const std::string& hash = {}) {
  write_hash_line(os, hash);
  os << "r,x,u,ode_residual\n";
}

} // namespace ctn

#endif
