#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conflap/conflap.hpp"

namespace conflap::cli {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Parsing helpers

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::optional<double> to_real(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> to_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

double require_real(const std::string& s, const std::string& what) {
  const auto v = to_real(s);
  if (!v) throw parameter_error(what + ": cannot parse '" + s + "' as a number");
  return *v;
}

/// "a,b,c" or "start:stop:count" (inclusive, evenly spaced).
std::vector<double> parse_real_grid(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw parameter_error(what + ": range must be start:stop:count");
    const double a = require_real(parts[0], what);
    const double b = require_real(parts[1], what);
    const auto count = to_int(parts[2]);
    if (!count || *count < 1) throw parameter_error(what + ": count must be a positive integer");
    if (*count == 1) return {a};
    for (int i = 0; i < *count; ++i) out.push_back(a + (b - a) * i / (*count - 1));
    return out;
  }
  for (const auto& p : split(text, ',')) out.push_back(require_real(p, what));
  if (out.empty()) throw parameter_error(what + ": empty list");
  return out;
}

/// "a,b,c" or "a:b" (inclusive).
std::vector<int> parse_int_grid(const std::string& text, const std::string& what) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    const auto a = parts.size() == 2 ? to_int(parts[0]) : std::nullopt;
    const auto b = parts.size() == 2 ? to_int(parts[1]) : std::nullopt;
    if (!a || !b || *b < *a) throw parameter_error(what + ": range must be a:b with a <= b");
    for (int i = *a; i <= *b; ++i) out.push_back(i);
    return out;
  }
  for (const auto& p : split(text, ',')) {
    const auto v = to_int(p);
    if (!v) throw parameter_error(what + ": cannot parse '" + p + "' as an integer");
    out.push_back(*v);
  }
  if (out.empty()) throw parameter_error(what + ": empty list");
  return out;
}

// ---------------------------------------------------------------------------
// Parallel sweeps with input-ordered results

unsigned worker_count(std::size_t tasks) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONFLAP_THREADS")) {
    const auto v = to_int(trim(env));
    if (!v || *v < 1) throw parameter_error("CONFLAP_THREADS must be a positive integer");
    cap = static_cast<unsigned>(*v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(tasks, 1)));
}

std::vector<json> parallel_map(std::size_t count, const std::function<json(std::size_t)>& task) {
  std::vector<json> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = worker_count(count);
  for (unsigned k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // The first failure in input order wins, so the reported error does not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

struct Report {
  std::string command;
  json params = json::object();
  json results = json::array();
  json diagnostics = json::object();
};

json calibration_json(const CalibrationRecord& c) {
  return json{{"reference", c.reference}, {"matched_value", c.matched_value}, {"residual", c.residual}, {"quad_error", c.quad_error}};
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return csv_cell(json(v.dump()));
}

void write_report(const Report& r, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    if (r.results.empty()) return;
    std::vector<std::string> keys;
    for (const auto& rec : r.results) {
      for (const auto& [k, v] : rec.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
      }
    }
    for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
    out << "\n";
    for (const auto& rec : r.results) {
      for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << (rec.contains(keys[i]) ? csv_cell(rec[keys[i]]) : "");
      out << "\n";
    }
    return;
  }
  json doc = json::object();
  doc["command"] = r.command;
  doc["params"] = r.params;
  doc["results"] = r.results;
  doc["diagnostics"] = r.diagnostics;
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Commands

struct Common {
  std::string format = "json";
  std::string output;
  long long seed = 0;
};

struct SymbolArgs {
  std::string geometry;
  int n = 0;
  double s = 0.0;
  std::string m = "0";
  std::string xi = "0";
};

Report cmd_symbol(const SymbolArgs& a) {
  Report r;
  r.command = "symbol";
  r.params = {{"geometry", a.geometry}, {"n", a.n}, {"s", a.s}, {"m", a.m}, {"xi", a.xi}};
  const FracParams p(a.n, a.s);
  const auto ms = parse_int_grid(a.m, "--m");
  if (a.geometry == "sphere") {
    for (int m : ms) r.results.push_back({{"m", m}, {"symbol", sphere::sphere_symbol(p, m)}});
    r.diagnostics = {{"curvature", sphere::sphere_curvature(p)}};
  } else {
    const auto xis = parse_real_grid(a.xi, "--xi");
    for (int m : ms) {
      for (double xi : xis) r.results.push_back({{"m", m}, {"xi", xi}, {"symbol", cylinder::cyl_symbol(p, m, xi)}});
    }
    r.diagnostics = {{"curvature", cylinder::cyl_curvature(p)}};
  }
  return r;
}

struct CurvatureArgs {
  int n = 0;
  double s = 0.0;
  std::optional<double> volume;
};

Report cmd_curvature(const CurvatureArgs& a) {
  Report r;
  r.command = "curvature";
  r.params = {{"n", a.n}, {"s", a.s}, {"volume", a.volume ? json(*a.volume) : json(nullptr)}};
  const FracParams p(a.n, a.s);
  json rec = {{"n", a.n}, {"s", a.s}};
  const double Q = sphere::sphere_curvature(p);
  rec["Q_s"] = Q;
  rec["c_ns"] = a.n >= 2 ? json(cylinder::cyl_curvature(p)) : json(nullptr);
  const bool pole = p.integer_order();
  rec["d_s"] = pole ? json(nullptr) : json(extension::d_s_const(a.s));
  rec["d_star_s"] = pole ? json(nullptr) : json(extension::d_star_const(a.s));
  const double vol = a.volume ? *a.volume : sphere::sphere_volume(a.n);
  rec["V_s"] = pole ? json(nullptr) : json(extension::weighted_volume_coefficient(p, Q, vol));
  r.results.push_back(rec);
  r.diagnostics = {{"volume", vol}, {"volume_source", a.volume ? "user" : "round sphere"},
                   {"integer_order", pole}};
  return r;
}

struct KernelArgs {
  std::string geometry;
  int n = 0;
  double s = 0.0;
  std::string x = "0.5,1,2";
  std::optional<double> L;
  double xi_ref = 1.0;
};

Report cmd_kernel(const KernelArgs& a) {
  Report r;
  r.command = "kernel";
  r.params = {{"geometry", a.geometry}, {"n", a.n}, {"s", a.s}, {"x", a.x},
              {"L", a.L ? json(*a.L) : json(nullptr)}, {"xi_ref", a.xi_ref}};
  const FracParams p(a.n, a.s);
  const auto xs = parse_real_grid(a.x, "--x");
  if (a.geometry == "sphere") {
    const auto spec = sphere::calibrate_kernel(p);
    for (double th : xs) r.results.push_back({{"theta", th}, {"kernel", sphere::sphere_kernel(spec, std::cos(th))}});
    r.diagnostics = {{"kappa", spec.kappa}, {"local_term", spec.A}, {"calibration", calibration_json(spec.calibration)}};
    return r;
  }
  const auto spec = cylinder::calibrate_kernel(p, a.xi_ref);
  if (a.geometry == "cylinder") {
    for (double h : xs) r.results.push_back({{"h", h}, {"kernel", cylinder::cyl_kernel(spec, h)}});
  } else {
    if (!a.L) throw parameter_error("kernel periodic: --L is required");
    for (double t : xs) r.results.push_back({{"t", t}, {"kernel", cylinder::periodized_kernel(spec, *a.L, t)}});
  }
  r.diagnostics = {{"normalization", spec.normalization}, {"decay_rate", spec.decay_rate()},
                   {"calibration", calibration_json(spec.calibration)}};
  return r;
}

struct ApplyArgs {
  std::string geometry;
  std::string input;
  std::string method = "spectral";
  int n = 1;
  double s = 0.0;
  std::optional<double> L;
  double leak_tol = 1e-3;
};

struct Samples {
  std::vector<double> x;
  std::vector<double> v;
};

Samples read_two_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("apply: cannot open input file '" + path + "'");
  Samples s;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) {
      throw parameter_error("apply: malformed input, line " + std::to_string(lineno) + " does not have two columns");
    }
    const auto x = to_real(fields[0]);
    const auto v = to_real(fields[1]);
    if (!x || !v) {
      if (header_allowed && !x && !v) {
        header_allowed = false;
        continue;
      }
      throw parameter_error("apply: malformed input, line " + std::to_string(lineno) + " is not numeric");
    }
    header_allowed = false;
    s.x.push_back(*x);
    s.v.push_back(*v);
  }
  if (s.x.empty()) throw parameter_error("apply: input file has no samples");
  return s;
}

void require_grid(const std::vector<double>& x, const std::function<double(std::size_t)>& expected, double scale,
                  const std::string& layout) {
  if (x.size() < 8 || !fft::is_power_of_two(x.size())) {
    throw parameter_error("apply: sample count must be a power of two >= 8, got " + std::to_string(x.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (std::abs(x[j] - expected(j)) > 1e-9 * scale) {
      throw parameter_error("apply: abscissa " + std::to_string(j) + " is off the grid " + layout + "; inputs are never resampled");
    }
  }
}

Report cmd_apply(const ApplyArgs& a) {
  Report r;
  r.command = "apply";
  r.params = {{"geometry", a.geometry}, {"input", a.input}, {"method", a.method}, {"n", a.n}, {"s", a.s},
              {"L", a.L ? json(*a.L) : json(nullptr)}, {"leak_tol", a.leak_tol}};
  const Samples in = read_two_column(a.input);
  const std::size_t N = in.x.size();
  std::vector<double> out;
  if (a.geometry == "line") {
    const double T = -in.x.front();
    if (!(T > 0.0)) throw parameter_error("apply: line grid must start at -T < 0");
    require_grid(in.x, [&](std::size_t j) { return -T + 2.0 * T * static_cast<double>(j) / static_cast<double>(N); }, T,
                 "-T + 2Tj/N");
    const euclidean::LineGridFunction f{T, in.v};
    if (a.method == "spectral") {
      const auto res = euclidean::frac_lap_spectral(a.s, f, a.leak_tol);
      out = res.value.values;
      r.diagnostics = {{"boundary_leak", res.boundary_leak}, {"T", T}, {"N", N}};
    } else {
      const auto cal = euclidean::calibrate_flat_constant(a.s);
      const auto res = euclidean::frac_lap_integral(a.s, f, cal.C);
      out = res.value.values;
      r.diagnostics = {{"C", cal.C}, {"calibration", calibration_json(cal.record)}, {"pv_correction", res.pv_correction},
                       {"T", T}, {"N", N}};
    }
  } else if (a.geometry == "circle") {
    require_grid(in.x, [&](std::size_t j) { return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N); },
                 1.0, "2 pi j/N");
    if (a.method == "spectral") {
      out = sphere::apply_circle_spectral(a.s, in.v);
      r.diagnostics = {{"N", N}};
    } else {
      const auto spec = sphere::calibrate_kernel(FracParams(1, a.s));
      const auto res = sphere::singular_integral_apply_circle(spec, in.v);
      out = res.values;
      r.diagnostics = {{"kappa", spec.kappa}, {"calibration", calibration_json(spec.calibration)}, {"band_tail", res.band_tail},
                       {"N", N}};
    }
  } else {
    if (!a.L) throw parameter_error("apply periodic: --L is required");
    if (a.method != "spectral") throw parameter_error("apply periodic: only the spectral method is available");
    const double L = *a.L;
    require_grid(in.x, [&](std::size_t j) { return L * static_cast<double>(j) / static_cast<double>(N); }, L, "Lj/N");
    out = delaunay::apply_Ls_periodic(FracParams(a.n, a.s), delaunay::PeriodicGridFunction{L, in.v}).values;
    r.diagnostics = {{"L", L}, {"N", N}};
  }
  for (std::size_t j = 0; j < N; ++j) r.results.push_back({{"x", in.x[j]}, {"value", out[j]}});
  return r;
}

struct ExtensionArgs {
  std::string s = "0.2,0.5,0.8";
  std::string xi = "0.5,1,2,4";
  int cells = 400;
};

Report cmd_extension(const ExtensionArgs& a) {
  Report r;
  r.command = "extension-check";
  r.params = {{"s", a.s}, {"xi", a.xi}, {"cells", a.cells}};
  const auto ss = parse_real_grid(a.s, "--s");
  const auto xis = parse_real_grid(a.xi, "--xi");
  std::vector<std::pair<double, double>> tasks;
  for (double s : ss) {
    for (double xi : xis) tasks.emplace_back(s, xi);
  }
  const auto recs = parallel_map(tasks.size(), [&](std::size_t i) {
    const auto [s, xi] = tasks[i];
    const auto coarse = extension::check_dtn(s, xi, a.cells);
    const auto fine = extension::check_dtn(s, xi, 2 * a.cells);
    return json{{"s", s}, {"xi", xi}, {"dtn", coarse.dtn}, {"exact", coarse.exact}, {"rel_error", coarse.rel_error},
                {"rel_error_halved", fine.rel_error}, {"reduction", coarse.rel_error / fine.rel_error},
                {"d_star_s", extension::d_star_const(s)}};
  });
  r.results = recs;
  r.diagnostics = {{"cells", a.cells}, {"cells_halved", 2 * a.cells}, {"y_max_times_xi", 30.0}};
  return r;
}

struct CovarianceArgs {
  std::string s = "0.3,0.5,0.7";
  std::string coeff;
  int degree = 8;
  double T = 200.0;
  int N = 1 << 17;
};

Report cmd_covariance(const CovarianceArgs& a, long long seed) {
  Report r;
  r.command = "covariance-check";
  sphere::ModeSpectrum u{1, {}};
  std::string source;
  if (!a.coeff.empty()) {
    u.coeff = parse_real_grid(a.coeff, "--coeff");
    source = "user";
  } else if (seed != 0) {
    if (a.degree < 0) throw parameter_error("--degree must be non-negative");
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int m = 0; m <= a.degree; ++m) u.coeff.push_back(dist(rng));
    source = "random";
  } else {
    if (a.degree < 0) throw parameter_error("--degree must be non-negative");
    for (int m = 0; m <= a.degree; ++m) u.coeff.push_back(1.0 / (1.0 + m));
    source = "1/(1+m)";
  }
  r.params = {{"s", a.s}, {"coeff", a.coeff}, {"degree", a.degree}, {"T", a.T}, {"N", a.N}, {"seed", seed}};
  const auto ss = parse_real_grid(a.s, "--s");
  r.results = parallel_map(ss.size(), [&](std::size_t i) {
    const auto rep = euclidean::covariance_bridge(ss[i], u, a.T, a.N);
    return json{{"s", ss[i]}, {"residual", rep.residual}, {"mismatch_abs", rep.mismatch_abs}};
  });
  r.diagnostics = {{"coefficients", u.coeff}, {"coefficient_source", source}, {"T", a.T}, {"N", a.N},
                   {"taper_fraction", 0.1}, {"compared_region", "|theta| <= 2 pi/3"}};
  return r;
}

struct BifurcationArgs {
  std::string n = "3";
  std::string s = "0.5";
};

Report cmd_bifurcation(const BifurcationArgs& a) {
  Report r;
  r.command = "bifurcation";
  r.params = {{"n", a.n}, {"s", a.s}};
  const auto ns = parse_int_grid(a.n, "--n");
  const auto ss = parse_real_grid(a.s, "--s");
  std::vector<FracParams> tasks;
  for (int n : ns) {
    for (double s : ss) tasks.emplace_back(n, s);
  }
  r.results = parallel_map(tasks.size(), [&](std::size_t i) {
    const auto& p = tasks[i];
    const double L0 = delaunay::bifurcation_period(p);
    return json{{"n", p.n}, {"s", p.s}, {"L0", L0}, {"c_ns", cylinder::cyl_curvature(p)},
                {"threshold", cylinder::cyl_curvature(p) * p.critical_power()}};
  });
  r.diagnostics = {{"method", "bisection on Theta^0_s(xi) = c_ns (n+2s)/(n-2s)"}, {"relative_bracket", 1e-15}};
  return r;
}

struct DelaunayArgs {
  int n = 3;
  double s = 0.5;
  std::string L;
  std::string L_factor = "1.2";
  int N = 256;
  double tol = 1e-11;
  int max_iter = 100;
  bool continuation = false;
  double step = 1.05;
  bool samples = false;
};

Report cmd_delaunay(const DelaunayArgs& a) {
  Report r;
  r.command = "delaunay";
  r.params = {{"n", a.n}, {"s", a.s}, {"L", a.L}, {"L_factor", a.L.empty() ? json(a.L_factor) : json(nullptr)},
              {"N", a.N}, {"tol", a.tol}, {"max_iter", a.max_iter}, {"continuation", a.continuation},
              {"step", a.step}, {"samples", a.samples}};
  const FracParams p(a.n, a.s);
  const double L0 = delaunay::bifurcation_period(p);
  std::vector<double> Ls;
  if (!a.L.empty()) {
    Ls = parse_real_grid(a.L, "--L");
  } else {
    for (double f : parse_real_grid(a.L_factor, "--L-factor")) Ls.push_back(f * L0);
  }
  delaunay::SolveOptions opt;
  opt.N = a.N;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;

  std::vector<delaunay::DelaunaySolution> sols;
  if (a.continuation) {
    if (!std::is_sorted(Ls.begin(), Ls.end())) throw parameter_error("delaunay: continuation targets must be increasing");
    sols = delaunay::continuation(p, Ls.front(), Ls, a.step, opt);
  } else {
    std::vector<std::optional<delaunay::DelaunaySolution>> tmp(Ls.size());
    parallel_map(Ls.size(), [&](std::size_t i) {
      tmp[i] = delaunay::solve_delaunay(p, Ls[i], std::nullopt, opt);
      return json();
    });
    for (auto& t : tmp) sols.push_back(*t);
  }
  const bool any_nonconstant = std::any_of(sols.begin(), sols.end(), [](const auto& s) { return s.nonconstant; });
  std::optional<delaunay::BubbleProfile> bubble;
  if (any_nonconstant) bubble = delaunay::bubble_profile(p);

  for (const auto& sol : sols) {
    if (a.samples) {
      for (int j = 0; j < sol.v.size(); ++j) {
        r.results.push_back({{"L", sol.L}, {"t", sol.v.t(j)}, {"v", sol.v.values[static_cast<std::size_t>(j)]}});
      }
      continue;
    }
    const auto one = delaunay::sample_periodic(sol.L, sol.v.size(), [](double) { return 1.0; });
    json rec = {{"L", sol.L},
                {"L_over_L0", sol.L / L0},
                {"residual", sol.residual},
                {"energy", sol.energy},
                {"energy_constant", delaunay::functional_FL(p, one)},
                {"nonconstant", sol.nonconstant},
                {"iterations", sol.iterations},
                {"deflated", sol.deflated},
                {"max_v", delaunay::sup_norm(sol.v.values)}};
    rec["tower_defect"] = sol.nonconstant ? json(delaunay::bubble_tower_defect(sol, *bubble)) : json(nullptr);
    rec["peak_ratio"] = sol.nonconstant ? json(delaunay::peak_ratio(sol, *bubble)) : json(nullptr);
    r.results.push_back(rec);
  }
  r.diagnostics = {{"L0", L0}, {"N", a.N}, {"tol", a.tol}};
  if (bubble) {
    r.diagnostics["bubble_amplitude"] = bubble->amplitude;
    r.diagnostics["bubble_ratio_spread"] = bubble->ratio_spread;
    r.diagnostics["bubble_grid"] = {{"period", bubble->grid_period}, {"N", bubble->grid_size}};
  }
  return r;
}

// ---------------------------------------------------------------------------
// selftest: a fixed invariant suite with pinned tolerances

struct Check {
  std::string name;
  double tolerance;
  std::function<double()> measure;  // returns the quantity compared against the tolerance
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<Check> selftest_checks() {
  std::vector<Check> c;
  c.push_back({"gamma_modulus", 1e-12, [] {
                 double worst = 0.0;
                 for (int i = 0; i < 100; ++i) {
                   const double y = 0.5 * i;
                   const double one = y == 0.0 ? 1.0 : std::numbers::pi * y / std::sinh(std::numbers::pi * y);
                   worst = std::max(worst, rel(specfun::gamma_abs2(1.0, y), one));
                   worst = std::max(worst, rel(specfun::gamma_abs2(0.5, y), std::numbers::pi / std::cosh(std::numbers::pi * y)));
                 }
                 return worst;
               }});
  c.push_back({"hyp2f1_log_closed_form", 1e-10, [] {
                 double worst = 0.0;
                 for (double z = 0.05; z < 1.0 - 1e-8; z = 1.0 - (1.0 - z) * 0.6) {
                   worst = std::max(worst, rel(specfun::hyp2f1({1.0, 1.0, 2.0, z}), -std::log1p(-z) / z));
                 }
                 return worst;
               }});
  c.push_back({"sphere_symbol_consistency", 1e-12, [] {
                 double worst = 0.0;
                 for (int n : {5, 6, 7}) {
                   for (int m = 0; m <= 50; ++m) {
                     worst = std::max(worst, rel(sphere::sphere_symbol({n, 1.0}, m), sphere::laplace_eigenvalue(n, m) + 0.25 * n * (n - 2)));
                     worst = std::max(worst, rel(sphere::sphere_symbol({n, 2.0}, m), sphere::gjms_symbol(n, 2, m)));
                   }
                   worst = std::max(worst, rel(sphere::sphere_symbol({n, 0.3}, 0), sphere::sphere_curvature({n, 0.3})));
                 }
                 return worst;
               }});
  c.push_back({"factorization", 1e-10, [] {
                 double worst = 0.0;
                 for (int n : {3, 4, 5}) {
                   for (double s0 : {0.3, 0.7}) {
                     for (int k : {1, 2}) {
                       if (!(s0 + k < 0.5 * n)) continue;
                       for (int m = 0; m <= 50; ++m) worst = std::max(worst, rel(sphere::factored_symbol({n, s0}, k, m), sphere::sphere_symbol({n, s0 + k}, m)));
                     }
                   }
                 }
                 return worst;
               }});
  c.push_back({"sphere_kernel_duality", 1e-6, [] {
                 const auto spec = sphere::calibrate_kernel({1, 0.3});
                 double worst = 0.0;
                 for (int m = 2; m <= 8; ++m) worst = std::max(worst, rel(sphere::kernel_symbol(spec, m), sphere::symbol(1, 0.3, m)));
                 return worst;
               }});
  c.push_back({"cylinder_closed_form", 1e-12, [] {
                 double worst = 0.0;
                 for (double xi = 0.0; xi <= 20.0; xi += 0.25) {
                   const double exact = xi == 0.0 ? 2.0 / std::numbers::pi : xi / std::tanh(0.5 * std::numbers::pi * xi);
                   worst = std::max(worst, rel(cylinder::cyl_symbol({3, 0.5}, 0, xi), exact));
                 }
                 return worst;
               }});
  c.push_back({"cylinder_kernel_duality", 1e-6, [] {
                 const FracParams p(3, 0.4);
                 const auto spec = cylinder::calibrate_kernel(p);
                 double worst = 0.0;
                 for (double xi : {0.3, 3.0, 12.0}) worst = std::max(worst, rel(cylinder::kernel_symbol(spec, xi), cylinder::cyl_symbol(p, 0, xi)));
                 return worst;
               }});
  c.push_back({"principal_symbol", 0.05, [] {
                 double worst = 0.0;
                 for (int n : {3, 4}) {
                   for (double s : {0.3, 0.5, 0.7}) worst = std::max(worst, std::abs(cylinder::cyl_symbol({n, s}, 0, 100.0) / std::pow(100.0, 2.0 * s) - 1.0));
                 }
                 return worst;
               }});
  c.push_back({"extension_dtn", 1e-3, [] { return extension::check_dtn(0.5, 1.0).rel_error; }});
  c.push_back({"extension_constants", 1e-13, [] { return rel(extension::d_star_const(0.3), -extension::d_s_const(0.3) / 0.6); }});
  c.push_back({"commutator", 1e-4, [] { return euclidean::commutator_check(0.5, euclidean::hermite_gaussian(40.0, 4096)).residual; }});
  c.push_back({"covariance_bridge", 1e-3, [] {
                 sphere::ModeSpectrum u{1, {}};
                 for (int m = 0; m <= 8; ++m) u.coeff.push_back(1.0 / (1.0 + m));
                 return euclidean::covariance_bridge(0.5, u, 200.0, 1 << 15).residual;
               }});
  c.push_back({"bifurcation_period", 1e-8, [] {
                 auto g = [](double xi) { return xi / std::tanh(0.5 * std::numbers::pi * xi) - 4.0 / std::numbers::pi; };
                 double lo = 0.1, hi = 5.0;
                 for (int i = 0; i < 200; ++i) {
                   const double mid = 0.5 * (lo + hi);
                   (g(mid) < 0.0 ? lo : hi) = mid;
                 }
                 return rel(delaunay::bifurcation_period({3, 0.5}), 2.0 * std::numbers::pi / (0.5 * (lo + hi)));
               }});
  c.push_back({"delaunay_solution", 1e-10, [] {
                 const FracParams p(3, 0.5);
                 const double L = 1.2 * delaunay::bifurcation_period(p);
                 const auto sol = delaunay::solve_delaunay(p, L);
                 const auto one = delaunay::sample_periodic(L, sol.v.size(), [](double) { return 1.0; });
                 const bool good = sol.nonconstant && sol.energy < delaunay::functional_FL(p, one);
                 return good ? sol.residual : std::numeric_limits<double>::infinity();
               }});
  c.push_back({"bubble_amplitude", 1e-3, [] { return rel(delaunay::bubble_profile({3, 0.5}).amplitude, 0.5 * std::numbers::pi); }});
  return c;
}

Report cmd_selftest(bool& all_passed) {
  Report r;
  r.command = "selftest";
  const auto checks = selftest_checks();
  r.results = parallel_map(checks.size(), [&](std::size_t i) {
    json rec = {{"check", checks[i].name}, {"tolerance", checks[i].tolerance}};
    try {
      const double v = checks[i].measure();
      rec["value"] = std::isfinite(v) ? json(v) : json(nullptr);
      rec["pass"] = v < checks[i].tolerance;
      rec["error"] = nullptr;
    } catch (const std::exception& e) {
      rec["value"] = nullptr;
      rec["pass"] = false;
      rec["error"] = e.what();
    }
    return rec;
  });
  int failed = 0;
  for (const auto& rec : r.results) failed += rec["pass"].get<bool>() ? 0 : 1;
  all_passed = failed == 0;
  r.diagnostics = {{"checks", checks.size()}, {"failed", failed}};
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conformal fractional Laplacians on spheres, cylinders and the line"};
  app.name("conflap");
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", common.output, "Write results to this file instead of standard output");
  app.add_option("--seed", common.seed, "Seed for randomized inputs (0 keeps the fixed defaults)");

  SymbolArgs sym;
  auto* c_sym = app.add_subcommand("symbol", "Symbol tables on the sphere or the cylinder");
  c_sym->add_option("geometry", sym.geometry)->required()->check(CLI::IsMember({"sphere", "cylinder"}));
  c_sym->add_option("--n", sym.n)->required();
  c_sym->add_option("--s", sym.s)->required();
  c_sym->add_option("--m", sym.m, "Degrees: list a,b,c or range a:b");
  c_sym->add_option("--xi", sym.xi, "Frequencies: list or start:stop:count (cylinder)");

  CurvatureArgs cur;
  auto* c_cur = app.add_subcommand("curvature", "Q_s, c_{n,s}, d_s, d*_s and V_s");
  c_cur->add_option("--n", cur.n)->required();
  c_cur->add_option("--s", cur.s)->required();
  c_cur->add_option("--volume", cur.volume, "Volume used for V_s (default: round S^n)");

  KernelArgs ker;
  auto* c_ker = app.add_subcommand("kernel", "Calibrated kernel samples");
  c_ker->add_option("geometry", ker.geometry)->required()->check(CLI::IsMember({"sphere", "cylinder", "periodic"}));
  c_ker->add_option("--n", ker.n)->required();
  c_ker->add_option("--s", ker.s)->required();
  c_ker->add_option("--x", ker.x, "Sample points: angle (sphere), h (cylinder) or t (periodic)");
  c_ker->add_option("--L", ker.L, "Period for the periodic kernel");
  c_ker->add_option("--xi-ref", ker.xi_ref, "Calibration frequency for the cylinder kernel");

  ApplyArgs app_args;
  auto* c_app = app.add_subcommand("apply", "Apply an operator to samples read from a two-column CSV file");
  c_app->add_option("geometry", app_args.geometry)->required()->check(CLI::IsMember({"line", "circle", "periodic"}));
  c_app->add_option("--input", app_args.input)->required();
  c_app->add_option("--s", app_args.s)->required();
  c_app->add_option("--method", app_args.method)->check(CLI::IsMember({"spectral", "integral"}));
  c_app->add_option("--n", app_args.n, "Cylinder dimension (periodic)");
  c_app->add_option("--L", app_args.L, "Period (periodic)");
  c_app->add_option("--leak-tol", app_args.leak_tol, "Boundary leak tolerance (line, spectral)");

  ExtensionArgs ext;
  auto* c_ext = app.add_subcommand("extension-check", "Dirichlet-to-Neumann error table");
  c_ext->add_option("--s", ext.s);
  c_ext->add_option("--xi", ext.xi);
  c_ext->add_option("--cells", ext.cells);

  CovarianceArgs cov;
  auto* c_cov = app.add_subcommand("covariance-check", "Stereographic covariance residuals on S^1");
  c_cov->add_option("--s", cov.s);
  c_cov->add_option("--coeff", cov.coeff, "Cosine coefficients of u by degree");
  c_cov->add_option("--degree", cov.degree, "Top degree for default or random coefficients");
  c_cov->add_option("--T", cov.T);
  c_cov->add_option("--N", cov.N);

  BifurcationArgs bif;
  auto* c_bif = app.add_subcommand("bifurcation", "Bifurcation period L0 over a parameter grid");
  c_bif->add_option("--n", bif.n);
  c_bif->add_option("--s", bif.s);

  DelaunayArgs del;
  auto* c_del = app.add_subcommand("delaunay", "Periodic solutions, energies and bubble-tower diagnostics");
  c_del->add_option("--n", del.n);
  c_del->add_option("--s", del.s);
  auto* opt_L = c_del->add_option("--L", del.L, "Periods");
  c_del->add_option("--L-factor", del.L_factor, "Periods as multiples of L0")->excludes(opt_L);
  c_del->add_option("--N", del.N);
  c_del->add_option("--tol", del.tol);
  c_del->add_option("--max-iter", del.max_iter);
  c_del->add_flag("--continuation", del.continuation, "Follow the branch through the periods in order");
  c_del->add_option("--step", del.step, "Largest period ratio per continuation step");
  c_del->add_flag("--samples", del.samples, "Emit solution samples instead of the summary");

  auto* c_self = app.add_subcommand("selftest", "Run the invariant suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  }

  try {
    Report report;
    int code = ok;
    if (c_sym->parsed()) {
      report = cmd_symbol(sym);
    } else if (c_cur->parsed()) {
      report = cmd_curvature(cur);
    } else if (c_ker->parsed()) {
      report = cmd_kernel(ker);
    } else if (c_app->parsed()) {
      report = cmd_apply(app_args);
    } else if (c_ext->parsed()) {
      report = cmd_extension(ext);
    } else if (c_cov->parsed()) {
      report = cmd_covariance(cov, common.seed);
    } else if (c_bif->parsed()) {
      report = cmd_bifurcation(bif);
    } else if (c_del->parsed()) {
      report = cmd_delaunay(del);
    } else if (c_self->parsed()) {
      bool passed = false;
      report = cmd_selftest(passed);
      if (!passed) code = numerical_failure;
    }
    report.params["format"] = common.format;
    report.params["seed"] = common.seed;
    if (common.output.empty()) {
      write_report(report, common.format, out);
    } else {
      std::ofstream file(common.output, std::ios::binary);
      if (!file) throw parameter_error("cannot open output file '" + common.output + "'");
      write_report(report, common.format, file);
    }
    if (code != ok) err << "error: selftest reported failing checks\n";
    return code;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const numerical_error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_failure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_failure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace conflap::cli
