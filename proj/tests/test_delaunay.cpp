#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "conflap/delaunay.hpp"

using namespace conflap;
using namespace conflap::delaunay;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const FracParams p3(3, 0.5);

// Root of xi coth(pi xi/2) = 4/pi by bisection on the closed form, independent of the Gamma-ratio symbol.
double closed_form_L0() {
  auto g = [](double xi) { return xi / std::tanh(0.5 * std::numbers::pi * xi) - 4.0 / std::numbers::pi; };
  double lo = 0.1, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 2.0 * std::numbers::pi / (0.5 * (lo + hi));
}

}  // namespace

TEST(ApplyLs, ConstantsAndModes) {
  const FracParams p(4, 0.3);
  const double L = 7.0;
  const auto one = sample_periodic(L, 64, [](double) { return 1.0; });
  for (double v : apply_Ls_periodic(p, one).values) EXPECT_LT(rel(v, cylinder::cyl_curvature(p)), 1e-13);
  for (int k : {1, 3}) {
    const auto mode = sample_periodic(L, 64, [&](double t) { return std::cos(2.0 * std::numbers::pi * k * t / L); });
    const double lam = theta0(p, 2.0 * std::numbers::pi * k / L);
    const auto r = apply_Ls_periodic(p, mode);
    for (int j = 0; j < 64; ++j) EXPECT_NEAR(r.values[static_cast<std::size_t>(j)], lam * mode.values[static_cast<std::size_t>(j)], 1e-12);
  }
}

TEST(ApplyLs, ClosedFormSymbolAtThreeHalf) {
  const double L = 4.0;
  for (int k : {1, 2, 5}) {
    const auto mode = sample_periodic(L, 32, [&](double t) { return std::sin(2.0 * std::numbers::pi * k * t / L); });
    const double xi = 2.0 * std::numbers::pi * k / L;
    const double lam = xi / std::tanh(std::numbers::pi * std::numbers::pi * k / L);
    const auto r = apply_Ls_periodic(p3, mode);
    for (int j = 0; j < 32; ++j) EXPECT_NEAR(r.values[static_cast<std::size_t>(j)], lam * mode.values[static_cast<std::size_t>(j)], 1e-12);
  }
}

TEST(Residual, ConstantIsExactEquilibrium) {
  for (int n : {2, 3, 5}) {
    for (double s : {0.2, 0.5, 0.8}) {
      const FracParams p(n, s);
      for (double L : {1.0, 10.0}) {
        const auto one = sample_periodic(L, 32, [](double) { return 1.0; });
        EXPECT_LT(sup_norm(residual(p, one).values), 1e-13);
      }
    }
  }
}

TEST(Residual, NotScaleEquivariant) {
  const auto two = sample_periodic(5.0, 32, [](double) { return 2.0; });
  EXPECT_GT(sup_norm(residual(p3, two).values), 1.0);
}

TEST(Residual, RejectsNonPositive) {
  auto v = sample_periodic(5.0, 32, [](double) { return 1.0; });
  v.values[4] = 0.0;
  EXPECT_THROW(residual(p3, v), domain_error);
  EXPECT_THROW(functional_FL(p3, v), domain_error);
}

TEST(Functional, ConstantAndHomogeneity) {
  const double L = 6.0;
  const auto one = sample_periodic(L, 64, [](double) { return 1.0; });
  const double expected = cylinder::cyl_curvature(p3) * std::pow(L, 1.0 - 2.0 / p3.two_star());
  EXPECT_LT(rel(functional_FL(p3, one), expected), 1e-13);
  const auto v = sample_periodic(L, 64, [&](double t) { return 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * t / L); });
  auto v3 = v;
  for (double& x : v3.values) x *= 3.0;
  EXPECT_LT(rel(functional_FL(p3, v3), functional_FL(p3, v)), 1e-12);
}

TEST(Bifurcation, ClosedFormRoot) {
  const double L0 = bifurcation_period(p3);
  EXPECT_LT(rel(L0, closed_form_L0()), 1e-8);
  EXPECT_LT(rel(L0, 5.1538187584122886404), 1e-10);
}

TEST(Bifurcation, DefiningEquationAndSignChange) {
  for (int n : {2, 3, 4}) {
    for (double s : {0.25, 0.5, 0.75}) {
      const FracParams p(n, s);
      const double L0 = bifurcation_period(p);
      EXPECT_LT(rel(theta0(p, 2.0 * std::numbers::pi / L0) / p.critical_power(), cylinder::cyl_curvature(p)), 1e-10);
      for (double f : {0.5, 0.9, 0.99}) EXPECT_GT(linearization_eigenvalue(p, f * L0, 1), 0.0);
      for (double f : {1.01, 1.1, 2.0}) EXPECT_LT(linearization_eigenvalue(p, f * L0, 1), 0.0);
      // Mode k crosses at k L0.
      EXPECT_NEAR(linearization_eigenvalue(p, 3.0 * L0, 3), 0.0, 1e-9);
    }
  }
}

TEST(SolveDelaunay, NonconstantAboveBifurcation) {
  const double L0 = bifurcation_period(p3);
  const double L = 1.2 * L0;
  const auto sol = solve_delaunay(p3, L);
  EXPECT_LT(sol.residual, 1e-10);
  EXPECT_TRUE(sol.nonconstant);
  EXPECT_GT(*std::min_element(sol.v.values.begin(), sol.v.values.end()), 0.0);
  const auto one = sample_periodic(L, sol.v.size(), [](double) { return 1.0; });
  EXPECT_LT(sol.energy, functional_FL(p3, one));
  // Maximum at L/2 and even about it.
  const auto imax = std::max_element(sol.v.values.begin(), sol.v.values.end()) - sol.v.values.begin();
  EXPECT_EQ(imax, sol.v.size() / 2);
  for (int j = 1; j < sol.v.size() / 2; ++j) {
    EXPECT_NEAR(sol.v.values[static_cast<std::size_t>(sol.v.size() / 2 + j)], sol.v.values[static_cast<std::size_t>(sol.v.size() / 2 - j)], 1e-12);
  }
}

TEST(SolveDelaunay, ShiftsStaySolutions) {
  const auto sol = solve_delaunay(p3, 1.3 * bifurcation_period(p3));
  for (int shift : {1, 17, 100}) {
    PeriodicGridFunction v = sol.v;
    std::rotate(v.values.begin(), v.values.begin() + shift, v.values.end());
    EXPECT_LT(sup_norm(residual(p3, v).values), 1e-10);
  }
}

TEST(SolveDelaunay, CollapsesBelowBifurcation) {
  const double L = 0.8 * bifurcation_period(p3);
  const auto init = sample_periodic(L, 256, [&](double t) { return 1.0 + 0.05 * std::cos(2.0 * std::numbers::pi * (t - 0.5 * L) / L); });
  for (const auto& sol : {solve_delaunay(p3, L), solve_delaunay(p3, L, init)}) {
    EXPECT_FALSE(sol.nonconstant);
    double dev = 0.0;
    for (double x : sol.v.values) dev = std::max(dev, std::abs(x - 1.0));
    EXPECT_LT(dev, 1e-6);
  }
}

TEST(SolveDelaunay, EnergyLadder) {
  for (const FracParams& p : {p3, FracParams(4, 0.3)}) {
    const double L0 = bifurcation_period(p);
    const auto sols = continuation(p, 1.1 * L0, {1.1 * L0, 1.5 * L0, 2.0 * L0, 3.0 * L0});
    double prev_max = 0.0;
    for (const auto& sol : sols) {
      EXPECT_TRUE(sol.nonconstant);
      EXPECT_LT(sol.residual, 1e-10);
      const auto one = sample_periodic(sol.L, sol.v.size(), [](double) { return 1.0; });
      EXPECT_LT(sol.energy, functional_FL(p, one)) << sol.L / L0;
      const double vmax = *std::max_element(sol.v.values.begin(), sol.v.values.end());
      EXPECT_GE(vmax, prev_max);
      prev_max = vmax;
    }
  }
}

TEST(SolveDelaunay, Errors) {
  EXPECT_THROW(solve_delaunay(FracParams(3, 1.2), 10.0), parameter_error);
  EXPECT_THROW(solve_delaunay(p3, -1.0), parameter_error);
  SolveOptions opt;
  opt.N = 100;
  EXPECT_THROW(solve_delaunay(p3, 8.0, std::nullopt, opt), parameter_error);
}

TEST(BubbleProfile, AmplitudeAndShape) {
  const auto b = bubble_profile(p3);
  EXPECT_LT(b.ratio_spread, 1e-3);
  // The amplitude matches the round-sphere curvature: (Q_s / c_{n,s})^{1/(p-1)} = pi/2 here.
  EXPECT_LT(rel(b.amplitude, 0.5 * std::numbers::pi), 1e-3);
  for (double t : {0.3, 1.7, 4.0}) EXPECT_EQ(b(t), b(-t));
  const double decay = 0.5 * (p3.n - 2.0 * p3.s);
  EXPECT_LT(rel(b(30.0) * std::exp(decay * 30.0), b.amplitude * std::pow(2.0, decay)), 1e-12);
}

TEST(BubbleProfile, ResidualOfBubbleSampleShrinksWithPeriod) {
  const auto b = bubble_profile(p3);
  double prev = INFINITY;
  for (double L : {10.0, 20.0, 40.0}) {
    int N = 256;
    while (L / N > 0.05) N *= 2;
    const auto v = sample_periodic(L, N, [&](double t) {
      double x = 0.0;
      for (int j = -3; j <= 3; ++j) x += b(t - 0.5 * L - j * L);
      return x;
    });
    const double r = sup_norm(residual(p3, v).values);
    EXPECT_LT(r, prev) << L;
    prev = r;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(BubbleTower, DefectDecreasesAndPeakApproachesBubble) {
  const double L0 = bifurcation_period(p3);
  const auto b = bubble_profile(p3);
  SolveOptions opt;
  opt.N = 512;
  const auto sols = continuation(p3, 1.2 * L0, {2.0 * L0, 3.0 * L0, 4.0 * L0}, 1.05, opt);
  double prev = INFINITY;
  for (const auto& sol : sols) {
    const double d = bubble_tower_defect(sol, b);
    // Triangle inequality: the defect is at most |v_L| + |tower|.
    double vnorm = 0.0, tnorm = 0.0;
    for (int i = 0; i < sol.v.size(); ++i) {
      double tower = 0.0;
      for (int j = -6; j <= 6; ++j) tower += b(sol.v.t(i) - 0.5 * sol.L - j * sol.L);
      vnorm += std::pow(sol.v.values[static_cast<std::size_t>(i)], 2);
      tnorm += tower * tower;
    }
    const double h = sol.L / sol.v.size();
    EXPECT_LE(d, std::sqrt(vnorm * h) + std::sqrt(tnorm * h));
    EXPECT_LT(d, prev) << sol.L / L0;
    prev = d;
  }
  EXPECT_LT(std::abs(peak_ratio(sols.back(), b) - 1.0), 0.05);
}
