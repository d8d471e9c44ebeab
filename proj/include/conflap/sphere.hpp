#pragma once

// The conformal fractional Laplacian on the round sphere S^n.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "conflap/errors.hpp"
#include "conflap/fft.hpp"
#include "conflap/params.hpp"
#include "conflap/specfun.hpp"

namespace conflap::sphere {

/// Coefficients of a zonal function in the degree-m eigenspaces of the Laplacian on S^n.
/// On S^1 the degree-m basis function is cos(m theta); on S^2 it is P_m(cos theta).
struct ModeSpectrum {
  int n = 1;
  std::vector<double> coeff;

  int max_degree() const { return static_cast<int>(coeff.size()) - 1; }
};

/// Laplace eigenvalue mu_m = m(m+n-1).
inline double laplace_eigenvalue(int n, int m) { return static_cast<double>(m) * (m + n - 1); }

/// Gamma(m+n/2+s)/Gamma(m+n/2-s) without range checks on s; the caller owns validity.
inline double symbol(int n, double s, int m) {
  if (m < 0) throw parameter_error("sphere symbol: degree must be non-negative");
  return specfun::gamma_ratio(m + 0.5 * n + s, m + 0.5 * n - s);
}

inline double sphere_symbol(const FracParams& p, int m) {
  p.validate();
  return symbol(p.n, p.s, m);
}

/// Q_s on the round sphere, Gamma(n/2+s)/Gamma(n/2-s).
inline double sphere_curvature(const FracParams& p) {
  p.validate();
  return specfun::gamma_ratio(0.5 * p.n + p.s, 0.5 * p.n - p.s);
}

/// Symbol of the conformal Laplacian P_1 = -Delta + n(n-2)/4 on degree m.
inline double conformal_laplacian_symbol(int n, int m) {
  return laplace_eigenvalue(n, m) + 0.25 * n * (n - 2);
}

/// GJMS operator of integer order 2k as the product of shifted Laplacians.
inline double gjms_symbol(int n, int k, int m) {
  const double mu = laplace_eigenvalue(n, m);
  double prod = 1.0;
  for (int j = 1; j <= k; ++j) prod *= mu + (0.5 * n + j - 1) * (0.5 * n - j);
  return prod;
}

inline ModeSpectrum apply_sphere(const FracParams& p, const ModeSpectrum& f) {
  p.validate();
  if (f.n != p.n) {
    throw parameter_error("apply_sphere: spectrum dimension " + std::to_string(f.n) +
                          " does not match n=" + std::to_string(p.n));
  }
  ModeSpectrum out{f.n, f.coeff};
  for (int m = 0; m <= f.max_degree(); ++m) out.coeff[static_cast<std::size_t>(m)] *= symbol(p.n, p.s, m);
  return out;
}

/// prod_{j=1..k} (lambda_1(m) + c_j) * P_{s0}(m), with c_j = -(s0+j-1)(s0+j).
inline double factored_symbol(const FracParams& p0, int k, int m) {
  p0.validate();
  if (!(p0.s < 1.0)) throw parameter_error("factored_symbol: base order must lie in (0,1)");
  if (k < 1) throw parameter_error("factored_symbol: k must be a positive integer");
  if (!(p0.s + k < 0.5 * p0.n)) {
    throw parameter_error("factored_symbol: s0 + k must be below n/2");
  }
  const double lambda1 = conformal_laplacian_symbol(p0.n, m);
  double prod = 1.0;
  for (int j = 1; j <= k; ++j) prod *= lambda1 - (p0.s + j - 1) * (p0.s + j);
  return prod * symbol(p0.n, p0.s, m);
}

/// kappa (1 - cos theta)^{-(n+2s)/2} plus the local term A u, with kappa calibrated.
struct KernelSpec {
  FracParams p;
  double kappa = 0.0;
  double A = 0.0;
  CalibrationRecord calibration;
};

namespace detail {

// 1 - G_m(1-y) for the Gegenbauer polynomial of index (n-1)/2 normalized to G_m(1) = 1,
// run in the complement variable so small angles keep their digits.
inline double one_minus_zonal(int n, int m, double y) {
  if (m == 0) return 0.0;
  const double lambda = 0.5 * (n - 1);
  double d_prev = 0.0;
  double d = y;
  for (int k = 1; k < m; ++k) {
    const double d_next = (2.0 * (k + lambda) * (y + d - y * d) - k * d_prev) / (k + 2.0 * lambda);
    d_prev = d;
    d = d_next;
  }
  return d;
}

inline double sphere_area(int dim) {
  // |S^dim| = 2 pi^{(dim+1)/2} / Gamma((dim+1)/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (dim + 1)) / std::tgamma(0.5 * (dim + 1));
}

struct ModeIntegral {
  double value = 0.0;
  double error = 0.0;
};

// I_m = int_{S^n} (1 - G_m(z.e)) (1 - z.e)^{-(n+2s)/2} dz, the kernel eigenvalue per unit kappa.
inline ModeIntegral mode_integral(int n, double s, int m) {
  if (m == 0) return {};
  const double q = 0.5 * (n + 2.0 * s);
  auto integrand = [=](double theta) {
    const double half = std::sin(0.5 * theta);
    const double y = 2.0 * half * half;
    if (y == 0.0) return 0.0;
    // (1 - G_m)/y stays bounded as y -> 0
    return one_minus_zonal(n, m, y) / y * std::pow(y, 1.0 - q) * std::pow(std::sin(theta), n - 1);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  const double v = integrator.integrate(integrand, 0.0, std::numbers::pi, 1e-14, &err, &l1);
  const double area = sphere_area(n - 1);
  return {area * v, area * err * l1};
}

}  // namespace detail

/// Fix kappa so the kernel representation reproduces the degree-1 symbol; degree 2 is the check.
inline KernelSpec calibrate_kernel(const FracParams& p) {
  p.validate();
  if (!(p.s < 1.0)) throw parameter_error("sphere kernel: requires 0 < s < 1");
  KernelSpec spec;
  spec.p = p;
  spec.A = sphere_curvature(p);
  const auto i1 = detail::mode_integral(p.n, p.s, 1);
  const double target = symbol(p.n, p.s, 1);
  spec.kappa = (target - spec.A) / i1.value;
  if (!(spec.kappa > 0.0)) throw convergence_error("sphere kernel: calibration produced non-positive kappa");
  const auto i2 = detail::mode_integral(p.n, p.s, 2);
  const double check = symbol(p.n, p.s, 2);
  spec.calibration.reference = 1.0;
  spec.calibration.matched_value = target;
  spec.calibration.residual = std::abs(spec.kappa * i2.value + spec.A - check) / check;
  spec.calibration.quad_error = std::max(i1.error, i2.error) / i1.value;
  return spec;
}

/// Symbol of degree m reconstructed from the calibrated kernel by quadrature.
inline double kernel_symbol(const KernelSpec& spec, int m) {
  return spec.kappa * detail::mode_integral(spec.p.n, spec.p.s, m).value + spec.A;
}

inline double sphere_kernel(const KernelSpec& spec, double cos_theta) {
  if (!(cos_theta >= -1.0 && cos_theta < 1.0)) {
    throw domain_error("sphere_kernel: cos(theta) must lie in [-1, 1)");
  }
  return spec.kappa * std::pow(1.0 - cos_theta, -0.5 * (spec.p.n + 2.0 * spec.p.s));
}

// ---------------------------------------------------------------------------
// Grids for n = 1 (uniform angles) and n = 2 (Gauss-Legendre in cos theta)

inline std::vector<double> circle_grid(int N) {
  std::vector<double> theta(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) theta[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * j / N;
  return theta;
}

inline std::vector<double> sample_circle(const ModeSpectrum& f, int N) {
  if (f.n != 1) throw parameter_error("sample_circle: spectrum must live on S^1");
  std::vector<double> u(static_cast<std::size_t>(N), 0.0);
  const auto theta = circle_grid(N);
  for (int j = 0; j < N; ++j) {
    double v = 0.0;
    for (int m = 0; m <= f.max_degree(); ++m) v += f.coeff[static_cast<std::size_t>(m)] * std::cos(m * theta[static_cast<std::size_t>(j)]);
    u[static_cast<std::size_t>(j)] = v;
  }
  return u;
}

/// Spectral action on uniform samples of S^1 (any u, not only zonal): bin k is scaled by the
/// degree-|k| symbol. Takes a raw order so that s >= 1/2 is allowed on the circle.
inline std::vector<double> apply_circle_spectral(double s, const std::vector<double>& u) {
  if (!(s > 0.0) || !std::isfinite(s)) throw parameter_error("apply_circle_spectral: s must be positive");
  if (u.size() < 2) throw parameter_error("apply_circle_spectral: need at least 2 samples");
  return fft::apply_symbol(u, [s](int j) { return symbol(1, s, std::abs(j)); });
}

/// Volume of the round unit sphere S^n.
inline double sphere_volume(int n) {
  if (n < 1) throw parameter_error("sphere_volume: n must be >= 1");
  return detail::sphere_area(n);
}

struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

inline GaussLegendre gauss_legendre(int N) {
  if (N < 1) throw parameter_error("gauss_legendre: need at least one node");
  const auto zeros = boost::math::legendre_p_zeros<double>(N);
  GaussLegendre gl;
  auto weight = [N](double x) {
    const double dp = boost::math::legendre_p_prime<double>(N, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  // Boost returns the non-negative zeros in increasing order.
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    gl.x.push_back(-*it);
    gl.w.push_back(weight(*it));
  }
  if (N % 2 == 1) {
    gl.x.push_back(0.0);
    gl.w.push_back(weight(0.0));
  }
  for (double z : zeros) {
    if (z == 0.0) continue;
    gl.x.push_back(z);
    gl.w.push_back(weight(z));
  }
  return gl;
}

/// P_0..P_M at x.
inline std::vector<double> legendre_table(int M, double x) {
  std::vector<double> P(static_cast<std::size_t>(M + 1));
  P[0] = 1.0;
  if (M >= 1) P[1] = x;
  for (int m = 1; m < M; ++m) {
    P[static_cast<std::size_t>(m + 1)] = ((2.0 * m + 1.0) * x * P[static_cast<std::size_t>(m)] - m * P[static_cast<std::size_t>(m - 1)]) / (m + 1.0);
  }
  return P;
}

inline std::vector<double> sample_zonal_s2(const ModeSpectrum& f, const std::vector<double>& nodes) {
  if (f.n != 2) throw parameter_error("sample_zonal_s2: spectrum must live on S^2");
  std::vector<double> u(nodes.size(), 0.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const auto P = legendre_table(std::max(f.max_degree(), 0), nodes[j]);
    double v = 0.0;
    for (int m = 0; m <= f.max_degree(); ++m) v += f.coeff[static_cast<std::size_t>(m)] * P[static_cast<std::size_t>(m)];
    u[j] = v;
  }
  return u;
}

/// Legendre coefficients of degree 0..M from samples at Gauss-Legendre nodes.
inline ModeSpectrum analyze_zonal_s2(const std::vector<double>& u, const GaussLegendre& gl, int M) {
  ModeSpectrum f{2, std::vector<double>(static_cast<std::size_t>(M + 1), 0.0)};
  for (std::size_t j = 0; j < u.size(); ++j) {
    const auto P = legendre_table(M, gl.x[j]);
    for (int m = 0; m <= M; ++m) f.coeff[static_cast<std::size_t>(m)] += gl.w[j] * u[j] * P[static_cast<std::size_t>(m)];
  }
  for (int m = 0; m <= M; ++m) f.coeff[static_cast<std::size_t>(m)] *= 0.5 * (2.0 * m + 1.0);
  return f;
}

// ---------------------------------------------------------------------------
// Principal-value evaluation of  int (u(z) - u(zeta)) K(z, zeta) dzeta + A u(z)

struct SingularApplyResult {
  std::vector<double> values;
  double band_tail = 0.0;  // relative spectral energy in the top quarter of the grid
};

namespace detail {

inline double spectral_tail(const std::vector<double>& u) {
  const int N = static_cast<int>(u.size());
  const auto U = fft::forward_real(u);
  double total = 0.0;
  double tail = 0.0;
  for (int k = 0; k < N; ++k) {
    const double e = std::norm(U[static_cast<std::size_t>(k)]);
    total += e;
    if (std::abs(fft::signed_index(k, N)) > N / 4) tail += e;
  }
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace detail

/// Kernel quadrature on S^1 at the uniform nodes 2 pi j/N. Near the diagonal the
/// difference u(z) - u(zeta) is reduced by alpha(1 - cos phi) + beta(1 - cos 2phi)
/// matching its phi^2 and phi^4 Taylor terms; those two pieces are integrated exactly
/// through the calibrated mode integrals.
inline SingularApplyResult singular_integral_apply_circle(const KernelSpec& spec, const std::vector<double>& u,
                                                          double tail_tol = 1e-8) {
  if (spec.p.n != 1) throw parameter_error("singular_integral_apply: kernel is not for S^1");
  const int N = static_cast<int>(u.size());
  if (N < 16) throw resolution_error("singular_integral_apply: need at least 16 samples");
  SingularApplyResult result;
  result.band_tail = detail::spectral_tail(u);
  if (result.band_tail > tail_tol) {
    throw resolution_error("singular_integral_apply: input is not resolved by the grid (spectral tail " +
                           std::to_string(result.band_tail) + ")");
  }
  const auto d2 = fft::apply_symbol(u, [](int k) { return -static_cast<double>(k) * k; }, true);
  const auto d4 = fft::apply_symbol(u, [](int k) { return std::pow(static_cast<double>(k), 4); }, true);
  const double h = 2.0 * std::numbers::pi / N;
  std::vector<double> kern(static_cast<std::size_t>(N), 0.0), c1(static_cast<std::size_t>(N)), c2(static_cast<std::size_t>(N));
  for (int d = 0; d < N; ++d) {
    const double phi = h * d;
    c1[static_cast<std::size_t>(d)] = 2.0 * std::pow(std::sin(0.5 * phi), 2);
    c2[static_cast<std::size_t>(d)] = 2.0 * std::pow(std::sin(phi), 2);
    if (d > 0) kern[static_cast<std::size_t>(d)] = spec.kappa * std::pow(c1[static_cast<std::size_t>(d)], -0.5 * (1.0 + 2.0 * spec.p.s));
  }
  const double i1 = detail::mode_integral(1, spec.p.s, 1).value;
  const double i2 = detail::mode_integral(1, spec.p.s, 2).value;
  result.values.assign(static_cast<std::size_t>(N), 0.0);
  for (int i = 0; i < N; ++i) {
    // alpha/2 + 2 beta = -u''/2,  alpha/24 + 2 beta/3 = u''''/24
    const double r2 = -0.5 * d2[static_cast<std::size_t>(i)];
    const double r4 = d4[static_cast<std::size_t>(i)] / 24.0;
    const double beta = (r4 - r2 / 12.0) / (2.0 / 3.0 - 1.0 / 6.0);
    const double alpha = 2.0 * (r2 - 2.0 * beta);
    double acc = 0.0;
    const double ui = u[static_cast<std::size_t>(i)];
    for (int d = 1; d < N; ++d) {
      const int j = (i + d) % N;
      const double r = ui - u[static_cast<std::size_t>(j)] - alpha * c1[static_cast<std::size_t>(d)] - beta * c2[static_cast<std::size_t>(d)];
      acc += r * kern[static_cast<std::size_t>(d)];
    }
    result.values[static_cast<std::size_t>(i)] = h * acc + spec.kappa * (alpha * i1 + beta * i2) + spec.A * ui;
  }
  return result;
}

/// Zonal functions on S^2 sampled at Gauss-Legendre nodes in cos(theta). The kernel acts on
/// each Legendre degree through its Funk-Hecke eigenvalue kappa I_m + A.
inline SingularApplyResult singular_integral_apply_s2(const KernelSpec& spec, const std::vector<double>& u,
                                                      const GaussLegendre& gl, double tail_tol = 1e-8) {
  if (spec.p.n != 2) throw parameter_error("singular_integral_apply: kernel is not for S^2");
  if (u.size() != gl.x.size()) throw parameter_error("singular_integral_apply: samples do not match nodes");
  const int N = static_cast<int>(u.size());
  const int M = N - 1;
  const auto f = analyze_zonal_s2(u, gl, M);
  double total = 0.0;
  double tail = 0.0;
  for (int m = 0; m <= M; ++m) {
    const double e = f.coeff[static_cast<std::size_t>(m)] * f.coeff[static_cast<std::size_t>(m)] / (2.0 * m + 1.0);
    total += e;
    if (m > (3 * M) / 4) tail += e;
  }
  SingularApplyResult result;
  result.band_tail = total > 0.0 ? std::sqrt(tail / total) : 0.0;
  if (result.band_tail > tail_tol) {
    throw resolution_error("singular_integral_apply: input is not resolved by the Gauss-Legendre grid");
  }
  ModeSpectrum g = f;
  for (int m = 0; m <= M; ++m) g.coeff[static_cast<std::size_t>(m)] *= kernel_symbol(spec, m);
  result.values = sample_zonal_s2(g, gl.x);
  return result;
}

// ---------------------------------------------------------------------------
// s-Yamabe quotient  int u P_s u / (int u^{2*})^{2/2*}  for zonal positive u

inline void require_positive(const std::vector<double>& u, const char* what) {
  for (double v : u) {
    if (!(v > 0.0)) throw domain_error(std::string(what) + ": function must be positive");
  }
}

/// u sampled at the uniform nodes of S^1.
inline double yamabe_quotient_circle(const FracParams& p, const std::vector<double>& u) {
  p.validate();
  if (p.n != 1) throw parameter_error("yamabe_quotient_circle: n must be 1");
  require_positive(u, "yamabe_quotient");
  const int N = static_cast<int>(u.size());
  const auto U = fft::forward_real(u);
  double num = 0.0;
  for (int k = 0; k < N; ++k) {
    const int m = std::abs(fft::signed_index(k, N));
    num += symbol(1, p.s, m) * std::norm(U[static_cast<std::size_t>(k)]);
  }
  num *= 2.0 * std::numbers::pi / (static_cast<double>(N) * N);
  const double ts = p.two_star();
  double den = 0.0;
  for (double v : u) den += std::pow(v, ts);
  den *= 2.0 * std::numbers::pi / N;
  return num / std::pow(den, 2.0 / ts);
}

/// u sampled at Gauss-Legendre nodes in cos(theta) on S^2.
inline double yamabe_quotient_s2(const FracParams& p, const std::vector<double>& u, const GaussLegendre& gl) {
  p.validate();
  if (p.n != 2) throw parameter_error("yamabe_quotient_s2: n must be 2");
  if (u.size() != gl.x.size()) throw parameter_error("yamabe_quotient_s2: samples do not match nodes");
  require_positive(u, "yamabe_quotient");
  const int M = static_cast<int>(u.size()) - 1;
  const auto f = analyze_zonal_s2(u, gl, M);
  double num = 0.0;
  for (int m = 0; m <= M; ++m) {
    const double c = f.coeff[static_cast<std::size_t>(m)];
    num += symbol(2, p.s, m) * c * c * 2.0 / (2.0 * m + 1.0);
  }
  num *= 2.0 * std::numbers::pi;
  const double ts = p.two_star();
  double den = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) den += gl.w[j] * std::pow(u[j], ts);
  den *= 2.0 * std::numbers::pi;
  return num / std::pow(den, 2.0 / ts);
}

}  // namespace conflap::sphere
