#pragma once

// Degenerate-elliptic extension at the level of a single Fourier mode:
//   U'' + (a/y) U' - xi^2 U = 0 on (0, inf),  U(0) = 1,  U decaying,
// whose weighted Neumann data recovers |xi|^{2s}.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "conflap/errors.hpp"
#include "conflap/params.hpp"
#include "conflap/specfun.hpp"

namespace conflap::extension {

/// d_s = 2^{2s} Gamma(s) / Gamma(-s).
inline double d_s_const(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw parameter_error("d_s: s must be positive");
  if (std::nearbyint(s) == s) throw pole_error("d_s: Gamma(-s) has a pole at integer s");
  return std::exp(2.0 * s * std::numbers::ln2) * specfun::gamma_ratio(s, -s);
}

/// d*_s = -2^{2s-1} Gamma(s) / (s Gamma(-s)).
inline double d_star_const(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw parameter_error("d*_s: s must be positive");
  if (std::nearbyint(s) == s) throw pole_error("d*_s: Gamma(-s) has a pole at integer s");
  return -std::exp((2.0 * s - 1.0) * std::numbers::ln2) * specfun::gamma_ratio(s, -s) / s;
}

/// One Fourier mode of the extension problem on the graded mesh y_k = y_max (k/K)^gamma.
struct ExtensionMode {
  double s = 0.5;
  double xi = 1.0;
  double y_max = 30.0;
  int cells = 400;
  double grading = 2.0;

  double a() const { return 1.0 - 2.0 * s; }

  std::vector<double> mesh() const {
    std::vector<double> y(static_cast<std::size_t>(cells + 1));
    for (int k = 0; k <= cells; ++k) y[static_cast<std::size_t>(k)] = y_max * std::pow(static_cast<double>(k) / cells, grading);
    return y;
  }
};

/// Reference setup: y_max = 30/|xi| and grading max(2, 1/s).
inline ExtensionMode make_extension_mode(double s, double xi, int cells = 400) {
  ExtensionMode m;
  m.s = s;
  m.xi = xi;
  m.cells = cells;
  m.y_max = xi == 0.0 ? 1.0 : 30.0 / std::abs(xi);
  m.grading = std::max(2.0, 1.0 / s);
  return m;
}

inline void validate_mode(const ExtensionMode& m) {
  if (!(m.s > 0.0 && m.s < 1.0)) throw parameter_error("extension: s must lie in (0,1)");
  if (!std::isfinite(m.xi)) throw parameter_error("extension: frequency must be finite");
  if (m.cells < 4) throw parameter_error("extension: need at least 4 cells");
  if (!(m.grading >= 1.0)) throw parameter_error("extension: grading exponent must be >= 1");
  if (m.xi != 0.0 && m.y_max * std::abs(m.xi) < 30.0) {
    throw domain_error("extension: y_max |xi| = " + std::to_string(m.y_max * std::abs(m.xi)) +
                       " is below 30, decay not captured");
  }
}

struct ExtensionSolution {
  double dtn_value = 0.0;  // d*_s times the consistent weighted flux
  double flux = 0.0;       // -lim y^a U'(y), as the Galerkin residual of the Dirichlet row
  double dtn_fit = 0.0;    // diagnostic: from U ~ 1 + c1 y^{2s} + c2 y^2 on the first nodes
  std::vector<double> y;
  std::vector<double> U;
};

namespace detail {

inline double moment(double p, double y0, double y1) {
  return (std::pow(y1, p + 1.0) - std::pow(y0, p + 1.0)) / (p + 1.0);
}

// Element matrices of int y^a (phi_i' phi_j' + xi^2 phi_i phi_j) on [y0, y1] for the P1 basis,
// with exact y^a moments.
struct Element {
  double k00, k01, k11;
};

inline Element element(double a, double xi, double y0, double y1) {
  const double h = y1 - y0;
  const double m0 = moment(a, y0, y1);
  const double m1 = moment(a + 1.0, y0, y1);
  const double m2 = moment(a + 2.0, y0, y1);
  const double st = m0 / (h * h);
  const double M00 = (y1 * y1 * m0 - 2.0 * y1 * m1 + m2) / (h * h);
  const double M11 = (y0 * y0 * m0 - 2.0 * y0 * m1 + m2) / (h * h);
  const double M01 = (-y0 * y1 * m0 + (y0 + y1) * m1 - m2) / (h * h);
  const double x2 = xi * xi;
  return {st + x2 * M00, -st + x2 * M01, st + x2 * M11};
}

// Tridiagonal solve, sub/super diagonals equal (symmetric).
inline std::vector<double> solve_symmetric_tridiagonal(std::vector<double> diag, const std::vector<double>& off,
                                                       std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

inline double fit_flux(const std::vector<double>& y, const std::vector<double>& U, double s, int nfit) {
  // Least squares for U - 1 = c1 y^{2s} + c2 y^2 on nodes 1..nfit.
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (int k = 1; k <= nfit && k < static_cast<int>(y.size()); ++k) {
    const double p = std::pow(y[static_cast<std::size_t>(k)], 2.0 * s);
    const double q = y[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
    const double r = U[static_cast<std::size_t>(k)] - 1.0;
    a11 += p * p;
    a12 += p * q;
    a22 += q * q;
    b1 += p * r;
    b2 += q * r;
  }
  const double det = a11 * a22 - a12 * a12;
  if (det == 0.0) return 0.0;
  return (a22 * b1 - a12 * b2) / det;
}

}  // namespace detail

/// P1 finite elements for the weighted energy with Dirichlet data U(0) = 1 and the Robin
/// closure U'(y_max) = -|xi| U(y_max). The flux is read from the Dirichlet row of the
/// assembled system (equivalently the discrete energy U^T A U), which is the consistent
/// Galerkin flux.
inline ExtensionSolution solve_extension_mode(const ExtensionMode& m) {
  validate_mode(m);
  ExtensionSolution sol;
  sol.y = m.mesh();
  const std::size_t n = sol.y.size();
  if (m.xi == 0.0) {
    sol.U.assign(n, 1.0);
    return sol;
  }
  const double a = m.a();
  std::vector<double> diag(n, 0.0), off(n - 1, 0.0);
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const auto el = detail::element(a, m.xi, sol.y[e], sol.y[e + 1]);
    diag[e] += el.k00;
    diag[e + 1] += el.k11;
    off[e] += el.k01;
  }
  diag[n - 1] += std::abs(m.xi) * std::pow(m.y_max, a);
  std::vector<double> d_in(diag.begin() + 1, diag.end());
  std::vector<double> o_in(off.begin() + 1, off.end());
  std::vector<double> rhs(n - 1, 0.0);
  rhs[0] = -off[0];
  const auto interior = detail::solve_symmetric_tridiagonal(d_in, o_in, rhs);
  sol.U.resize(n);
  sol.U[0] = 1.0;
  std::copy(interior.begin(), interior.end(), sol.U.begin() + 1);
  const double dstar = d_star_const(m.s);
  sol.flux = diag[0] + off[0] * sol.U[1];
  sol.dtn_value = dstar * sol.flux;
  constexpr int fit_nodes = 6;
  sol.dtn_fit = -dstar * 2.0 * m.s * detail::fit_flux(sol.y, sol.U, m.s, fit_nodes);
  return sol;
}

/// int y^a (U'^2 + xi^2 U^2) dy over the mesh plus the exterior Robin contribution, for any
/// piecewise-linear profile on the mode's mesh. At the computed minimizer this equals
/// dtn_value / d*_s (positive for decaying profiles).
inline double energy_of_extension(const ExtensionMode& m, const std::vector<double>& U) {
  validate_mode(m);
  const auto y = m.mesh();
  if (U.size() != y.size()) throw parameter_error("energy_of_extension: profile does not match mesh");
  if (m.xi == 0.0) {
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
      const double d = (U[k + 1] - U[k]) / (y[k + 1] - y[k]);
      e += d * d * detail::moment(m.a(), y[k], y[k + 1]);
    }
    return e;
  }
  double e = 0.0;
  for (std::size_t k = 0; k + 1 < y.size(); ++k) {
    const auto el = detail::element(m.a(), m.xi, y[k], y[k + 1]);
    e += el.k00 * U[k] * U[k] + 2.0 * el.k01 * U[k] * U[k + 1] + el.k11 * U[k + 1] * U[k + 1];
  }
  e += std::abs(m.xi) * std::pow(m.y_max, m.a()) * U.back() * U.back();
  return e;
}

/// Relative error of the mode D-t-N value against |xi|^{2s}.
struct DtnCheck {
  double dtn = 0.0;
  double exact = 0.0;
  double rel_error = 0.0;
};

inline DtnCheck check_dtn(double s, double xi, int cells = 400) {
  if (xi == 0.0) throw parameter_error("check_dtn: frequency must be nonzero");
  DtnCheck c;
  c.dtn = solve_extension_mode(make_extension_mode(s, xi, cells)).dtn_value;
  c.exact = std::pow(std::abs(xi), 2.0 * s);
  c.rel_error = std::abs(c.dtn - c.exact) / c.exact;
  return c;
}

/// V_s = Q vol / (d_s (n/2 - s)), the coefficient of the renormalized weighted volume.
inline double weighted_volume_coefficient(const FracParams& p, double Q_const, double vol_M) {
  p.validate();
  p.require_noninteger("weighted_volume_coefficient");
  return Q_const * vol_M / (d_s_const(p.s) * (0.5 * p.n - p.s));
}

}  // namespace conflap::extension
