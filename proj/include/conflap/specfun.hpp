#pragma once

// Real log-Gamma, |Gamma(x+iy)|^2 and the Gauss hypergeometric function on [0,1].
// Everything here is pure and reentrant.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "conflap/errors.hpp"

namespace conflap::specfun {

inline bool is_nonpositive_integer(double x) {
  return x <= 0.0 && std::nearbyint(x) == x;
}

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw domain_error("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  return boost::math::lgamma(x);
}

struct SignedLogGamma {
  int sign = 1;
  double log_abs = 0.0;

  double value() const { return sign * std::exp(log_abs); }
};

/// Gamma(x) as sign * exp(log_abs); negative arguments go through the reflection formula.
inline SignedLogGamma signed_gamma(double x) {
  if (!std::isfinite(x)) throw domain_error("signed_gamma: non-finite argument");
  if (is_nonpositive_integer(x)) {
    throw pole_error("signed_gamma: pole at non-positive integer " + std::to_string(x));
  }
  if (x > 0.0) return {1, log_gamma(x)};
  // Gamma(x) Gamma(1-x) = pi / sin(pi x)
  const double sin_pix = std::sin(std::numbers::pi * x);
  const SignedLogGamma reflected{1, log_gamma(1.0 - x)};
  return {sin_pix > 0.0 ? 1 : -1,
          std::log(std::numbers::pi) - std::log(std::abs(sin_pix)) - reflected.log_abs};
}

inline double gamma(double x) { return signed_gamma(x).value(); }

/// 1/Gamma(x), entire; exactly zero at the poles of Gamma.
inline double reciprocal_gamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  const SignedLogGamma g = signed_gamma(x);
  return g.sign * std::exp(-g.log_abs);
}

/// Gamma(a)/Gamma(b) with sign, computed in log space. Zero when only b is a pole.
inline double gamma_ratio(double a, double b) {
  if (is_nonpositive_integer(b) && !is_nonpositive_integer(a)) return 0.0;
  const SignedLogGamma ga = signed_gamma(a);
  const SignedLogGamma gb = signed_gamma(b);
  return ga.sign * gb.sign * std::exp(ga.log_abs - gb.log_abs);
}

namespace detail {

// Lanczos g = 7, n = 9.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Re ln Gamma(z) for Re z >= 1/2.
inline double lanczos_log_abs(std::complex<double> z) {
  z -= 1.0;
  std::complex<double> series = lanczos_coeff[0];
  for (std::size_t i = 1; i < lanczos_coeff.size(); ++i) {
    series += lanczos_coeff[i] / (z + static_cast<double>(i));
  }
  const std::complex<double> t = z + lanczos_g + 0.5;
  const std::complex<double> log_gamma =
      0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
  return log_gamma.real();
}

// ln|sin(pi (x + i y))|, stable for large |y|.
inline double log_abs_sin_pi(double x, double y) {
  const double ay = std::abs(y);
  const double e2 = std::exp(-2.0 * std::numbers::pi * ay);
  const double arg = e2 * e2 - 2.0 * std::cos(2.0 * std::numbers::pi * x) * e2;
  return 0.5 * (2.0 * std::numbers::pi * ay - std::log(4.0) + std::log1p(arg));
}

}  // namespace detail

/// ln|Gamma(x + iy)|.
inline double log_abs_gamma(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw domain_error("log_abs_gamma: non-finite argument");
  if (y == 0.0 && is_nonpositive_integer(x)) {
    throw pole_error("log_abs_gamma: pole at " + std::to_string(x));
  }
  if (x >= 0.5) return detail::lanczos_log_abs({x, y});
  // |Gamma(z)| |Gamma(1-z)| = pi / |sin(pi z)|
  return std::log(std::numbers::pi) - detail::log_abs_sin_pi(x, y) -
         detail::lanczos_log_abs({1.0 - x, -y});
}

/// |Gamma(x + iy)|^2.
inline double gamma_abs2(double x, double y) { return std::exp(2.0 * log_abs_gamma(x, y)); }

struct Hyp2F1Args {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double z = 0.0;
};

namespace detail {

inline constexpr double series_rel_tol = 1e-17;
inline constexpr int series_max_terms = 10000;
inline constexpr double degenerate_window = 1e-6;
inline constexpr double richardson_step = 1e-3;

inline bool terminates(double a, double b) {
  return is_nonpositive_integer(a) || is_nonpositive_integer(b);
}

// Plain Gauss series. Valid for |z| < 1, or any z when a or b terminates the series.
inline double hyp2f1_series(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < series_max_terms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) < series_rel_tol * std::abs(sum)) return sum;
  }
  throw convergence_error("hyp2f1: series did not converge within 10000 terms");
}

// Gamma(p1) Gamma(p2) / (Gamma(q1) Gamma(q2)); zero when a denominator argument is a pole.
inline double gamma_product_ratio(double p1, double p2, double q1, double q2) {
  if (is_nonpositive_integer(q1) || is_nonpositive_integer(q2)) return 0.0;
  const SignedLogGamma g1 = signed_gamma(p1), g2 = signed_gamma(p2);
  const SignedLogGamma h1 = signed_gamma(q1), h2 = signed_gamma(q2);
  return g1.sign * g2.sign * h1.sign * h2.sign *
         std::exp(g1.log_abs + g2.log_abs - h1.log_abs - h2.log_abs);
}

// z -> 1 - z connection formula, written in terms of w = 1 - z.
// Requires c - a - b away from the integers.
inline double hyp2f1_connection(double a, double b, double c, double w) {
  const double d = c - a - b;
  const double first = gamma_product_ratio(c, d, c - a, c - b);
  const double second = gamma_product_ratio(c, -d, a, b);
  double value = 0.0;
  if (first != 0.0) value += first * hyp2f1_series(a, b, 1.0 - d, w);
  if (second != 0.0 && w > 0.0) value += second * std::pow(w, d) * hyp2f1_series(c - a, c - b, 1.0 + d, w);
  return value;
}

inline bool near_integer(double x, double window) { return std::abs(x - std::nearbyint(x)) < window; }

// Connection formula with the integer-gap degeneracy removed by symmetric
// perturbation of c and sixth-order Richardson extrapolation in the step.
inline double hyp2f1_transformed(double a, double b, double c, double w) {
  if (!near_integer(c - a - b, degenerate_window)) return hyp2f1_connection(a, b, c, w);
  const double h = richardson_step;
  auto pair = [&](int k) { return 0.5 * (hyp2f1_connection(a, b, c + k * h, w) + hyp2f1_connection(a, b, c - k * h, w)); };
  return 1.5 * pair(1) - 0.6 * pair(2) + 0.1 * pair(3);
}

inline void validate_hyp2f1(double a, double b, double c) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw parameter_error("hyp2f1: non-finite parameter");
  }
  if (is_nonpositive_integer(c)) throw parameter_error("hyp2f1: c must not be a non-positive integer");
}

}  // namespace detail

/// Gauss value 2F1(a,b;c;1) = Gamma(c)Gamma(c-a-b)/(Gamma(c-a)Gamma(c-b)), c-a-b > 0.
inline double hyp2f1_at_one(double a, double b, double c) {
  detail::validate_hyp2f1(a, b, c);
  if (!(c - a - b > 0.0)) throw parameter_error("hyp2f1: z = 1 requires c - a - b > 0");
  return detail::gamma_product_ratio(c, c - a - b, c - a, c - b);
}

/// 2F1(a,b;c;1-w) for w in [0,1]. Takes the complement directly so callers
/// near z = 1 keep full precision in w.
inline double hyp2f1_complement(double a, double b, double c, double w) {
  detail::validate_hyp2f1(a, b, c);
  if (!(w >= 0.0 && w <= 1.0)) throw domain_error("hyp2f1: complement argument outside [0,1]");
  const double z = 1.0 - w;
  if (detail::terminates(a, b)) return detail::hyp2f1_series(a, b, c, z);
  if (w == 0.0) return hyp2f1_at_one(a, b, c);
  if (z <= 0.5) return detail::hyp2f1_series(a, b, c, z);
  if (!(c - a - b > -1e3)) throw parameter_error("hyp2f1: parameters outside supported range");
  return detail::hyp2f1_transformed(a, b, c, w);
}

/// 2F1(a,b;c;z) for real z in [0,1].
inline double hyp2f1(const Hyp2F1Args& args) {
  detail::validate_hyp2f1(args.a, args.b, args.c);
  if (!(args.z >= 0.0 && args.z <= 1.0)) throw domain_error("hyp2f1: z outside [0,1]");
  if (detail::terminates(args.a, args.b)) return detail::hyp2f1_series(args.a, args.b, args.c, args.z);
  if (args.z == 1.0) return hyp2f1_at_one(args.a, args.b, args.c);
  if (args.z <= 0.5) return detail::hyp2f1_series(args.a, args.b, args.c, args.z);
  return detail::hyp2f1_transformed(args.a, args.b, args.c, 1.0 - args.z);
}

}  // namespace conflap::specfun
