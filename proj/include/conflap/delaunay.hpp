#pragma once

// Periodic radial solutions of  L^L_s v = c_{n,s} v^{(n+2s)/(n-2s)}  on the cylinder.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conflap/cylinder.hpp"
#include "conflap/errors.hpp"
#include "conflap/fft.hpp"
#include "conflap/params.hpp"
#include "conflap/sphere.hpp"

namespace conflap::delaunay {

/// Samples of an L-periodic function at t_j = jL/N.
struct PeriodicGridFunction {
  double L = 1.0;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double t(int j) const { return L * j / size(); }
};

inline void validate_grid(const PeriodicGridFunction& v) {
  if (!(v.L > 0.0) || !std::isfinite(v.L)) throw parameter_error("period must be positive");
  if (v.size() < 8 || !fft::is_power_of_two(v.values.size())) throw parameter_error("sample count must be a power of two >= 8");
  for (double x : v.values) {
    if (!std::isfinite(x)) throw parameter_error("samples must be finite");
  }
}

inline void require_positive(const PeriodicGridFunction& v, const char* what) {
  for (double x : v.values) {
    if (!(x > 0.0)) throw domain_error(std::string(what) + ": function must be positive");
  }
}

inline void require_delaunay(const FracParams& p) {
  cylinder::require_cylinder(p);
  if (!(p.s < 1.0)) throw parameter_error("delaunay: s must lie in (0,1)");
}

template <class F>
PeriodicGridFunction sample_periodic(double L, int N, F&& f) {
  PeriodicGridFunction v{L, std::vector<double>(static_cast<std::size_t>(N))};
  for (int j = 0; j < N; ++j) v.values[static_cast<std::size_t>(j)] = f(v.t(j));
  return v;
}

inline double theta0(const FracParams& p, double xi) { return cylinder::cyl_symbol(p, 0, xi); }

/// Diagonal action Theta^0_s(2 pi k / L) on the discrete Fourier modes.
inline PeriodicGridFunction apply_Ls_periodic(const FracParams& p, const PeriodicGridFunction& v) {
  require_delaunay(p);
  validate_grid(v);
  const double L = v.L;
  PeriodicGridFunction out{L, fft::apply_symbol(v.values, [&](int k) { return theta0(p, 2.0 * std::numbers::pi * k / L); })};
  return out;
}

inline PeriodicGridFunction residual(const FracParams& p, const PeriodicGridFunction& v) {
  require_positive(v, "residual");
  auto r = apply_Ls_periodic(p, v);
  const double c = cylinder::cyl_curvature(p);
  const double q = p.critical_power();
  for (std::size_t j = 0; j < r.values.size(); ++j) r.values[j] -= c * std::pow(v.values[j], q);
  return r;
}

inline double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// F_L(v) = L sum_k Theta(2 pi k/L) |v_k|^2 / (int_0^L v^{2*})^{2/2*}, v_k = DFT/N.
inline double functional_FL(const FracParams& p, const PeriodicGridFunction& v) {
  require_delaunay(p);
  validate_grid(v);
  require_positive(v, "functional_FL");
  const int N = v.size();
  const auto V = fft::forward_real(v.values);
  double num = 0.0;
  for (int k = 0; k < N; ++k) {
    const double xi = 2.0 * std::numbers::pi * std::abs(fft::signed_index(k, N)) / v.L;
    num += theta0(p, xi) * std::norm(V[static_cast<std::size_t>(k)]);
  }
  num *= v.L / (static_cast<double>(N) * N);
  const double ts = p.two_star();
  double den = 0.0;
  for (double x : v.values) den += std::pow(x, ts);
  den *= v.L / N;
  return num / std::pow(den, 2.0 / ts);
}

/// Theta^0_s(2 pi k/L) - c_{n,s}(n+2s)/(n-2s): the k-th eigenvalue of the linearization at v = 1.
inline double linearization_eigenvalue(const FracParams& p, double L, int k) {
  require_delaunay(p);
  return theta0(p, 2.0 * std::numbers::pi * k / L) - cylinder::cyl_curvature(p) * p.critical_power();
}

/// Period L0 at which the first nontrivial linearized eigenvalue crosses zero,
/// by bisection on xi for Theta^0_s(xi) = c_{n,s}(n+2s)/(n-2s).
inline double bifurcation_period(const FracParams& p) {
  require_delaunay(p);
  const double target = cylinder::cyl_curvature(p) * p.critical_power();
  double lo = 0.0;
  double hi = 1.0;
  int grow = 0;
  while (theta0(p, hi) <= target) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 60) throw convergence_error("bifurcation_period: could not bracket the crossing");
  }
  if (!(theta0(p, lo) < target)) throw convergence_error("bifurcation_period: bracketing failure");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (theta0(p, mid) < target ? lo : hi) = mid;
  }
  return 2.0 * std::numbers::pi / (0.5 * (lo + hi));
}

struct DelaunaySolution {
  FracParams p;
  double L = 0.0;
  PeriodicGridFunction v;
  std::vector<double> cosine_coeff;  // v(t) = sum_k a_k cos(2 pi k (t - L/2)/L)
  double residual = 0.0;             // sup norm of the equation defect
  double energy = 0.0;               // F_L(v)
  bool nonconstant = false;          // |v - mean|_2 > 1e-6
  int iterations = 0;
  bool deflated = false;             // constant solution deflated during the solve
};

struct SolveOptions {
  int N = 256;
  double tol = 1e-11;
  int max_iter = 100;
};

namespace detail {

// Even cosine basis about t = L/2 on the sample grid; the columns are orthogonal, so the
// pseudo-inverse is a scaled transpose.
struct CosineBasis {
  int N = 0;
  int M = 0;
  Eigen::MatrixXd C;  // N x (M+1)
  Eigen::MatrixXd P;  // (M+1) x N
  Eigen::VectorXd theta;

  CosineBasis(const FracParams& p, double L, int N_) : N(N_), M(N_ / 2) {
    C.resize(N, M + 1);
    for (int j = 0; j < N; ++j) {
      for (int k = 0; k <= M; ++k) C(j, k) = std::cos(2.0 * std::numbers::pi * k * (static_cast<double>(j) / N - 0.5));
    }
    P = C.transpose();
    for (int k = 0; k <= M; ++k) P.row(k) *= (k == 0 || k == M) ? 1.0 / N : 2.0 / N;
    theta.resize(M + 1);
    for (int k = 0; k <= M; ++k) theta(k) = theta0(p, 2.0 * std::numbers::pi * k / L);
  }
};

struct NewtonOutcome {
  Eigen::VectorXd a;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Deflation of the constant solution: residual r is replaced by m(a) r with
// m = 1/d^2 + 1, d^2 = (a_0 - 1)^2 + sum_k a_k^2 / 2.
inline double deflation_distance2(const Eigen::VectorXd& a) {
  double d2 = (a(0) - 1.0) * (a(0) - 1.0);
  for (Eigen::Index k = 1; k < a.size(); ++k) d2 += 0.5 * a(k) * a(k);
  return d2;
}

inline NewtonOutcome newton(const CosineBasis& B, double c, double q, Eigen::VectorXd a, bool deflate, const SolveOptions& opt) {
  NewtonOutcome out;
  auto eval = [&](const Eigen::VectorXd& coeff, Eigen::VectorXd& v, Eigen::VectorXd& R) -> bool {
    v = B.C * coeff;
    if ((v.array() <= 0.0).any()) return false;
    R = B.C * (B.theta.cwiseProduct(coeff)) - c * v.array().pow(q).matrix();
    return true;
  };
  auto merit = [&](const Eigen::VectorXd& coeff) {
    Eigen::VectorXd v, R;
    if (!eval(coeff, v, R)) return std::numeric_limits<double>::infinity();
    const double base = (B.P * R).norm();
    return deflate ? base * (1.0 / deflation_distance2(coeff) + 1.0) : base;
  };
  Eigen::VectorXd v, R;
  if (!eval(a, v, R)) throw domain_error("solve_delaunay: initial guess must be positive");
  for (int it = 0; it <= opt.max_iter; ++it) {
    out.iterations = it;
    out.residual = R.cwiseAbs().maxCoeff();
    if (out.residual < opt.tol) {
      out.converged = true;
      break;
    }
    if (it == opt.max_iter) break;
    const Eigen::VectorXd r = B.P * R;
    Eigen::MatrixXd J = -B.P * ((c * q * v.array().pow(q - 1.0)).matrix().asDiagonal() * B.C);
    J.diagonal() += B.theta;
    Eigen::VectorXd step;
    if (deflate) {
      const double d2 = deflation_distance2(a);
      const double m = 1.0 / d2 + 1.0;
      Eigen::VectorXd grad = -a / (d2 * d2);
      grad(0) = -2.0 * (a(0) - 1.0) / (d2 * d2);
      const Eigen::MatrixXd Jd = m * J + r * grad.transpose();
      step = Jd.partialPivLu().solve(-m * r);
    } else {
      step = J.partialPivLu().solve(-r);
    }
    const double m0 = merit(a);
    double lambda = 1.0;
    Eigen::VectorXd trial = a + step;
    for (int half = 0; half < 20; ++half) {
      trial = a + lambda * step;
      if (merit(trial) < m0) break;
      lambda *= 0.5;
    }
    a = trial;
    if (!eval(a, v, R)) break;
  }
  out.a = a;
  return out;
}

inline Eigen::VectorXd cosine_init(int M, double amplitude) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(M + 1);
  a(0) = 1.0;
  a(1) = amplitude;
  return a;
}

}  // namespace detail

/// Unit-amplitude profile cosh(t)^{-(n-2s)/2}.
inline double unit_bubble(const FracParams& p, double t) { return std::pow(std::cosh(t), -0.5 * (p.n - 2.0 * p.s)); }

namespace detail {

inline DelaunaySolution finish(const FracParams& p, double L, const CosineBasis& B, const NewtonOutcome& o, bool deflated) {
  Eigen::VectorXd a = o.a;
  Eigen::VectorXd v = B.C * a;
  Eigen::Index imax = 0;
  v.maxCoeff(&imax);
  // Move the maximum to t = L/2: a half-period shift flips the odd cosine modes.
  if (std::abs(static_cast<double>(imax) - B.N / 2.0) > B.N / 4.0) {
    for (Eigen::Index k = 1; k < a.size(); k += 2) a(k) = -a(k);
    v = B.C * a;
  }
  DelaunaySolution sol;
  sol.p = p;
  sol.L = L;
  sol.v = PeriodicGridFunction{L, std::vector<double>(v.data(), v.data() + v.size())};
  sol.cosine_coeff.assign(a.data(), a.data() + a.size());
  sol.residual = sup_norm(residual(p, sol.v).values);
  sol.energy = functional_FL(p, sol.v);
  const double mean = v.mean();
  sol.nonconstant = std::sqrt((v.array() - mean).square().sum() * L / B.N) > 1e-6;
  sol.iterations = o.iterations;
  sol.deflated = deflated;
  return sol;
}

inline Eigen::VectorXd project(const CosineBasis& B, const PeriodicGridFunction& init) {
  if (init.size() != B.N) throw parameter_error("solve_delaunay: initial guess has the wrong sample count");
  Eigen::Map<const Eigen::VectorXd> v(init.values.data(), B.N);
  return B.P * v;
}

}  // namespace detail

/// Newton iteration in the even cosine basis about L/2 (this removes the translation mode).
/// Without an initial guess and L > L0, the constant solution is deflated and the start
/// 1 + A cos(2 pi (t - L/2)/L) is tried for A = 0.3, 0.1, 0.5, then a single bubble.
/// With a guess, plain Newton is run first; if it lands on the constant above L0, the same
/// guess is retried with deflation.
inline DelaunaySolution solve_delaunay(const FracParams& p, double L, const std::optional<PeriodicGridFunction>& init = std::nullopt,
                                       const SolveOptions& opt = {}) {
  require_delaunay(p);
  if (!(L > 0.0)) throw parameter_error("solve_delaunay: period must be positive");
  if (opt.N < 8 || !fft::is_power_of_two(static_cast<std::size_t>(opt.N))) throw parameter_error("solve_delaunay: N must be a power of two");
  const detail::CosineBasis B(p, L, opt.N);
  const double c = cylinder::cyl_curvature(p);
  const double q = p.critical_power();
  const double L0 = bifurcation_period(p);
  const bool above = L > L0;

  std::vector<std::pair<Eigen::VectorXd, bool>> attempts;
  if (init) {
    const Eigen::VectorXd a = detail::project(B, *init);
    attempts.emplace_back(a, false);
    if (above) attempts.emplace_back(a, true);
  } else if (!above) {
    attempts.emplace_back(detail::cosine_init(B.M, 0.3), false);
  } else {
    for (double amp : {0.3, 0.1, 0.5}) attempts.emplace_back(detail::cosine_init(B.M, amp), true);
    const double amp = std::pow(sphere::sphere_curvature(p) / c, 1.0 / (q - 1.0));
    PeriodicGridFunction bubble = sample_periodic(L, opt.N, [&](double t) {
      double v = 0.0;
      for (int j = -4; j <= 4; ++j) v += amp * unit_bubble(p, t - 0.5 * L - j * L);
      return v;
    });
    attempts.emplace_back(detail::project(B, bubble), true);
  }

  double last_residual = std::numeric_limits<double>::infinity();
  std::optional<DelaunaySolution> constant;
  for (const auto& [a0, deflate] : attempts) {
    detail::NewtonOutcome o;
    try {
      o = detail::newton(B, c, q, a0, deflate, opt);
    } catch (const domain_error&) {
      continue;
    }
    last_residual = o.residual;
    if (!o.converged) continue;
    DelaunaySolution sol = detail::finish(p, L, B, o, deflate);
    if (!above || sol.nonconstant) return sol;
    constant = sol;
  }
  // Above L0 every attempt collapsed onto v = 1; report it rather than fail.
  if (constant) return *constant;
  throw convergence_error("solve_delaunay: Newton did not converge, last residual " + std::to_string(last_residual));
}

/// Follow the nonconstant branch from L_start through each target period with steps of at
/// most `factor`. Coefficients in the cosine basis carry over unchanged when L is rescaled,
/// which is exact spectral interpolation of the previous solution.
inline std::vector<DelaunaySolution> continuation(const FracParams& p, double L_start, const std::vector<double>& targets,
                                                  double factor = 1.05, const SolveOptions& opt = {}) {
  std::vector<DelaunaySolution> out;
  DelaunaySolution cur = solve_delaunay(p, L_start, std::nullopt, opt);
  double L = L_start;
  for (double target : targets) {
    if (target < L) throw parameter_error("continuation: targets must be increasing and above the start");
    while (L < target) {
      const double next = std::min(L * factor, target);
      const auto guess = sample_periodic(next, opt.N, [&](double t) {
        double v = 0.0;
        for (std::size_t k = 0; k < cur.cosine_coeff.size(); ++k) {
          v += cur.cosine_coeff[k] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * (t / next - 0.5));
        }
        return v;
      });
      cur = solve_delaunay(p, next, guess, opt);
      L = next;
    }
    out.push_back(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-bubble limit  v_inf(t) = c cosh(t)^{-(n-2s)/2}

struct BubbleProfile {
  FracParams p;
  double amplitude = 0.0;
  double ratio_spread = 0.0;  // std/mean of the calibration ratio over [-3, 3]
  double grid_period = 0.0;
  int grid_size = 0;

  double operator()(double t) const { return amplitude * unit_bubble(p, t); }
};

/// The amplitude is fixed by applying the operator to cosh^{-(n-2s)/2} on a long periodic grid
/// and requiring L w / (c_{n,s} w^p) to equal c^{1-p}; the ratio must be flat on [-3, 3].
inline BubbleProfile bubble_profile(const FracParams& p, double spread_tol = 1e-3) {
  require_delaunay(p);
  const double decay = 0.5 * (p.n - 2.0 * p.s);
  const double half = std::max(30.0, 36.0 / decay);
  const double L = 2.0 * half;
  int N = 256;
  while (L / N > 0.03) N *= 2;
  const auto w = sample_periodic(L, N, [&](double t) { return unit_bubble(p, t - half); });
  const auto Lw = apply_Ls_periodic(p, w);
  const double c = cylinder::cyl_curvature(p);
  const double q = p.critical_power();
  double sum = 0.0;
  double sum2 = 0.0;
  int count = 0;
  for (int j = 0; j < N; ++j) {
    const double t = w.t(j) - half;
    if (std::abs(t) > 3.0) continue;
    const double r = Lw.values[static_cast<std::size_t>(j)] / (c * std::pow(w.values[static_cast<std::size_t>(j)], q));
    sum += r;
    sum2 += r * r;
    ++count;
  }
  const double mean = sum / count;
  const double var = std::max(0.0, sum2 / count - mean * mean);
  BubbleProfile b;
  b.p = p;
  b.ratio_spread = std::sqrt(var) / mean;
  b.grid_period = L;
  b.grid_size = N;
  if (!(mean > 0.0) || b.ratio_spread > spread_tol) {
    throw convergence_error("bubble_profile: calibration ratio is not constant (spread " + std::to_string(b.ratio_spread) + ")");
  }
  b.amplitude = std::pow(mean, 1.0 / (q - 1.0));
  return b;
}

/// L2(0,L) distance from v_L to the tower sum_{|j|<=J} v_inf(. - L/2 - jL), J chosen so the
/// neglected images are below 1e-12 of the amplitude.
inline double bubble_tower_defect(const DelaunaySolution& sol, const BubbleProfile& bubble) {
  const double decay = 0.5 * (sol.p.n - 2.0 * sol.p.s);
  int J = 1;
  while (std::pow(2.0, decay) * std::exp(-decay * (J + 0.5) * sol.L) > 1e-12) ++J;
  const int N = sol.v.size();
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    const double t = sol.v.t(i);
    double tower = 0.0;
    for (int j = -J; j <= J; ++j) tower += bubble(t - 0.5 * sol.L - j * sol.L);
    const double d = sol.v.values[static_cast<std::size_t>(i)] - tower;
    acc += d * d;
  }
  return std::sqrt(acc * sol.L / N);
}

/// Largest sample of v_L over the peak of v_inf.
inline double peak_ratio(const DelaunaySolution& sol, const BubbleProfile& bubble) {
  return *std::max_element(sol.v.values.begin(), sol.v.values.end()) / bubble(0.0);
}

}  // namespace conflap::delaunay
