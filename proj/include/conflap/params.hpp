#pragma once

#include <cmath>
#include <string>

#include "conflap/errors.hpp"

namespace conflap {

/// Dimension n and fractional order s, with the exponents derived from them.
struct FracParams {
  int n = 1;
  double s = 0.5;

  FracParams() = default;
  FracParams(int n_, double s_) : n(n_), s(s_) { validate(); }

  void validate() const {
    if (n < 1) throw parameter_error("dimension n must be >= 1, got " + std::to_string(n));
    if (!std::isfinite(s) || !(s > 0.0) || !(s < 0.5 * n)) {
      throw parameter_error("order s must satisfy 0 < s < n/2, got s=" + std::to_string(s) +
                            " n=" + std::to_string(n));
    }
  }

  double sigma() const { return 0.5 * n + s; }
  double a() const { return 1.0 - 2.0 * s; }
  double two_star() const { return 2.0 * n / (n - 2.0 * s); }
  /// Critical exponent (n+2s)/(n-2s).
  double critical_power() const { return (n + 2.0 * s) / (n - 2.0 * s); }
  bool integer_order() const { return std::nearbyint(s) == s; }

  /// Throws when s is an integer; Gamma(-s) has a pole there.
  void require_noninteger(const char* what) const {
    if (integer_order()) {
      throw pole_error(std::string(what) + ": requires non-integer s, got s=" + std::to_string(s));
    }
  }
};

/// How a normalization constant was pinned down by matching a reference value.
struct CalibrationRecord {
  double reference = 0.0;      // frequency, degree or width at which the match was made
  double matched_value = 0.0;  // the target value that was reproduced
  double residual = 0.0;       // relative mismatch after calibration
  double quad_error = 0.0;     // quadrature error estimate
};

}  // namespace conflap
