#pragma once

// The conformal fractional Laplacian on the cylinder R x S^{n-1}.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "conflap/errors.hpp"
#include "conflap/params.hpp"
#include "conflap/specfun.hpp"

namespace conflap::cylinder {

inline void require_cylinder(const FracParams& p) {
  p.validate();
  if (p.n < 2) throw parameter_error("cylinder: dimension n must be >= 2");
}

/// beta = sqrt((n/2-1)^2 + m(m+n-2)) = m + n/2 - 1.
inline double beta(int n, int m) { return m + 0.5 * n - 1.0; }

/// Theta^m_s(xi) = 2^{2s} |Gamma(1/2+s/2+beta/2+i xi/2)|^2 / |Gamma(1/2-s/2+beta/2+i xi/2)|^2.
inline double cyl_symbol(const FracParams& p, int m, double xi) {
  require_cylinder(p);
  if (m < 0) throw parameter_error("cyl_symbol: degree must be non-negative");
  if (!std::isfinite(xi)) throw parameter_error("cyl_symbol: frequency must be finite");
  const double b = beta(p.n, m);
  const double y = 0.5 * std::abs(xi);
  const double top = specfun::log_abs_gamma(0.5 + 0.5 * p.s + 0.5 * b, y);
  const double bottom = specfun::log_abs_gamma(0.5 - 0.5 * p.s + 0.5 * b, y);
  return std::exp(2.0 * p.s * std::numbers::ln2 + 2.0 * (top - bottom));
}

/// c_{n,s} = 2^{2s} (Gamma(n/4+s/2)/Gamma(n/4-s/2))^2, the curvature of the cylinder.
inline double cyl_curvature(const FracParams& p) {
  require_cylinder(p);
  const double r = specfun::gamma_ratio(0.25 * p.n + 0.5 * p.s, 0.25 * p.n - 0.5 * p.s);
  return std::exp(2.0 * p.s * std::numbers::ln2) * r * r;
}

/// Radial convolution kernel of the m = 0 operator with its calibrated normalization.
struct KernelSpec {
  FracParams p;
  double A = 0.0;  // (n+2s)/2
  double B = 0.0;  // 1+s
  double normalization = 1.0;
  CalibrationRecord calibration;

  double hyp_a() const { return 0.5 * (A + 1.0) - B; }
  double hyp_b() const { return 0.5 * A - B + 1.0; }
  double hyp_c() const { return A - B + 1.0; }
  /// Exponential decay rate of the kernel at infinity.
  double decay_rate() const { return A; }
};

inline KernelSpec make_kernel_spec(const FracParams& p, double normalization = 1.0) {
  require_cylinder(p);
  p.require_noninteger("cylinder kernel");
  if (!(p.s < 1.0)) throw parameter_error("cylinder kernel: requires 0 < s < 1");
  KernelSpec spec;
  spec.p = p;
  spec.A = 0.5 * (p.n + 2.0 * p.s);
  spec.B = 1.0 + p.s;
  spec.normalization = normalization;
  return spec;
}

namespace detail {

inline double log_sinh(double h) {
  if (h > 1.0) return h + std::log1p(-std::exp(-2.0 * h)) - std::numbers::ln2;
  return std::log(std::sinh(h));
}

inline double log_cosh(double h) { return h + std::log1p(std::exp(-2.0 * h)) - std::numbers::ln2; }

// ln of the kernel with unit normalization, h > 0.
inline double log_unit_kernel(const KernelSpec& spec, double h) {
  const double s = spec.p.s;
  const double n = spec.p.n;
  double f = 0.0;
  const double sech = 1.0 / std::cosh(h);
  const double sech2 = sech * sech;
  if (sech2 <= 0.5) {
    f = specfun::hyp2f1({spec.hyp_a(), spec.hyp_b(), spec.hyp_c(), sech2});
  } else {
    const double t = std::tanh(h);
    f = specfun::hyp2f1_complement(spec.hyp_a(), spec.hyp_b(), spec.hyp_c(), t * t);
  }
  if (!(f > 0.0)) throw convergence_error("cylinder kernel: hypergeometric factor is not positive");
  return -(1.0 + 2.0 * s) * log_sinh(h) + 0.5 * (2.0 - n + 2.0 * s) * log_cosh(h) + std::log(f);
}

}  // namespace detail

/// K(h) = norm (sinh h)^{-1-2s} (cosh h)^{(2-n+2s)/2} 2F1(a,b;c;sech^2 h).
inline double cyl_kernel(const KernelSpec& spec, double h) {
  if (h == 0.0 || !std::isfinite(h)) throw domain_error("cyl_kernel: singular at h = 0");
  return spec.normalization * std::exp(detail::log_unit_kernel(spec, std::abs(h)));
}

/// d ln K / dh by a centered difference of the log kernel.
inline double log_slope(const KernelSpec& spec, double h, double rel_step = 1e-4) {
  const double dh = rel_step * std::abs(h);
  return (detail::log_unit_kernel(spec, h + dh) - detail::log_unit_kernel(spec, h - dh)) / (2.0 * dh);
}

struct DualityIntegral {
  double value = 0.0;
  double error = 0.0;
};

/// int_R (1 - cos(xi h)) K(h) dh for the unit-normalized kernel.
/// (0,1): tanh-sinh for the h^{1-2s} endpoint; (1, h_cut): adaptive Gauss-Kronrod;
/// beyond h_cut the kernel is replaced by its exponential tail, integrated in closed form.
inline DualityIntegral duality_integral(const KernelSpec& spec, double xi) {
  const double lambda = spec.decay_rate();
  const double h_cut = 40.0 / (spec.p.n + 2.0 * spec.p.s);
  auto integrand = [&](double h) {
    if (h <= 0.0) return 0.0;
    const double sn = std::sin(0.5 * xi * h);
    if (sn == 0.0) return 0.0;
    return std::exp(std::log(2.0 * sn * sn) + detail::log_unit_kernel(spec, h));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double err0 = 0.0;
  const double near = ts.integrate(integrand, 0.0, 1.0, 1e-14, &err0);
  double err1 = 0.0;
  const double mid = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 1.0, h_cut, 20, 1e-14, &err1);
  const double k_cut = std::exp(detail::log_unit_kernel(spec, h_cut));
  const std::complex<double> osc = std::exp(std::complex<double>(0.0, xi * h_cut)) / std::complex<double>(lambda, -xi);
  const double tail = k_cut * (1.0 / lambda - osc.real());
  DualityIntegral out;
  out.value = 2.0 * (near + mid + tail);
  out.error = 2.0 * (err0 * std::abs(near) + err1 + 1e-3 * std::abs(tail));
  return out;
}

/// Kernel side of the duality, int (1 - cos xi h) K dh + c_{n,s}.
inline double kernel_symbol(const KernelSpec& spec, double xi) {
  return spec.normalization * duality_integral(spec, xi).value + cyl_curvature(spec.p);
}

/// Normalize the kernel so the duality identity holds exactly at xi_ref; 2 xi_ref is the check.
inline KernelSpec calibrate_kernel(const FracParams& p, double xi_ref = 1.0) {
  if (!(xi_ref >= 0.5 && xi_ref <= 2.0)) throw parameter_error("calibrate_kernel: reference frequency must lie in [0.5, 2]");
  KernelSpec spec = make_kernel_spec(p);
  const double c = cyl_curvature(p);
  const auto j = duality_integral(spec, xi_ref);
  const double target = cyl_symbol(p, 0, xi_ref);
  spec.normalization = (target - c) / j.value;
  if (!(spec.normalization > 0.0)) throw convergence_error("calibrate_kernel: non-positive normalization");
  const double check_xi = 2.0 * xi_ref;
  const double check = cyl_symbol(p, 0, check_xi);
  spec.calibration.reference = xi_ref;
  spec.calibration.matched_value = target;
  spec.calibration.residual = std::abs(kernel_symbol(spec, check_xi) - check) / check;
  spec.calibration.quad_error = j.error / j.value;
  if (spec.calibration.residual > 1e-8) {
    throw convergence_error("calibrate_kernel: verification residual " + std::to_string(spec.calibration.residual) +
                            " exceeds 1e-8");
  }
  return spec;
}

/// K_L(xi) = sum_j K(xi - jL), truncated once the geometric tail bound drops below 1e-15 relative.
inline double periodized_kernel(const KernelSpec& spec, double L, double xi) {
  if (!(L > 0.0)) throw parameter_error("periodized_kernel: period must be positive");
  const double r = std::fmod(xi, L);
  const double x = r < 0.0 ? r + L : r;
  if (x == 0.0) throw domain_error("periodized_kernel: singular on the lattice L Z");
  const double ratio = std::exp(-spec.decay_rate() * L);
  const double tail_factor = 1.0 / (1.0 - ratio);
  // Images in distance order: x, L-x, L+x, 2L-x, ...
  double sum = 0.0;
  for (int j = 0; j < 100000; ++j) {
    const double d_left = j * L + x;
    const double d_right = (j + 1) * L - x;
    const double term = cyl_kernel(spec, d_left) + cyl_kernel(spec, d_right);
    sum += term;
    if (j > 0 && term * ratio * tail_factor < 1e-15 * sum) return sum;
  }
  throw convergence_error("periodized_kernel: lattice sum did not converge");
}

}  // namespace conflap::cylinder
