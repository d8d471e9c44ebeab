#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "conflap/sphere.hpp"

using namespace conflap;
using namespace conflap::sphere;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(SphereSymbol, Examples) {
  EXPECT_LT(rel(sphere_symbol({3, 0.5}, 1), 2.0), 1e-14);
  EXPECT_LT(rel(sphere_symbol({2, 0.75}, 0), std::tgamma(1.75) / std::tgamma(0.25)), 1e-13);
  for (int n : {3, 4, 5}) {
    for (int m = 0; m <= 20; ++m) {
      EXPECT_LT(rel(sphere_symbol({n, 1.0}, m), laplace_eigenvalue(n, m) + 0.25 * n * (n - 2)), 1e-12);
    }
  }
}

TEST(SphereSymbol, DegreeZeroIsCurvature) {
  for (int n : {1, 2, 3, 6}) {
    for (double s : {0.1, 0.3, 0.45}) {
      const FracParams p(n, s);
      EXPECT_LT(rel(sphere_symbol(p, 0), sphere_curvature(p)), 1e-14);
    }
  }
}

TEST(SphereSymbol, PositiveAndIncreasing) {
  for (int n : {1, 2, 3, 5}) {
    for (double s : {0.05, 0.25, 0.49}) {
      const FracParams p(n, s);
      double prev = sphere_symbol(p, 0);
      EXPECT_GT(prev, 0.0);
      for (int m = 1; m <= 200; ++m) {
        const double cur = sphere_symbol(p, m);
        EXPECT_GT(cur, prev) << n << " " << s << " " << m;
        prev = cur;
      }
    }
  }
}

TEST(SphereSymbol, IntegerOrdersMatchGjmsProducts) {
  for (int n : {5, 6, 7}) {
    for (int m = 0; m <= 50; ++m) {
      EXPECT_LT(rel(sphere_symbol({n, 1.0}, m), gjms_symbol(n, 1, m)), 1e-12);
      EXPECT_LT(rel(sphere_symbol({n, 2.0}, m), gjms_symbol(n, 2, m)), 1e-12);
    }
  }
}

TEST(SphereSymbol, RejectsInvalidParams) {
  EXPECT_THROW(FracParams(2, 1.0), parameter_error);
  EXPECT_THROW(FracParams(3, 0.0), parameter_error);
  EXPECT_THROW(FracParams(0, 0.1), parameter_error);
}

TEST(SphereCurvature, Examples) {
  EXPECT_LT(rel(sphere_curvature({2, 0.5}), 0.5), 1e-14);
  EXPECT_LT(rel(sphere_curvature({3, 1.0}), 0.75), 1e-14);
  EXPECT_LT(rel(sphere_curvature({3, 0.5}), 1.0), 1e-14);
}

TEST(ApplySphere, Examples) {
  const FracParams p(3, 1.0);
  ModeSpectrum f{3, std::vector<double>(8, 1.0)};
  const auto g = apply_sphere(p, f);
  for (int m = 0; m < 8; ++m) EXPECT_LT(rel(g.coeff[static_cast<std::size_t>(m)], m * (m + 2.0) + 0.75), 1e-12);

  ModeSpectrum one{2, {1.0, 0.0, 0.0}};
  const auto q = apply_sphere({2, 0.3}, one);
  EXPECT_LT(rel(q.coeff[0], sphere_curvature({2, 0.3})), 1e-14);
  EXPECT_EQ(q.coeff[1], 0.0);

  ModeSpectrum circle{1, {0.0, 0.0, 1.0}};
  // beta = 2m on the circle: Gamma(2.9)/Gamma(2.1) for m = 2, s = 0.4.
  EXPECT_LT(rel(apply_sphere({1, 0.4}, circle).coeff[2], std::tgamma(2.9) / std::tgamma(2.1)), 1e-13);

  EXPECT_THROW(apply_sphere({2, 0.3}, circle), parameter_error);
}

TEST(FactoredSymbol, Examples) {
  EXPECT_LT(rel(factored_symbol({5, 0.5}, 1, 0), 6.0), 1e-13);
  EXPECT_LT(rel(factored_symbol({5, 0.3}, 2, 3), sphere_symbol({5, 2.3}, 3)), 1e-10);
  EXPECT_THROW(factored_symbol({3, 0.7}, 1, 0), parameter_error);
  EXPECT_THROW(factored_symbol({4, 0.3}, 2, 0), parameter_error);
}

TEST(FactoredSymbol, IdentityOverGrid) {
  for (int n : {3, 4, 5}) {
    for (double s0 : {0.3, 0.7}) {
      for (int k : {1, 2}) {
        if (!(s0 + k < 0.5 * n)) continue;
        for (int m = 0; m <= 50; ++m) {
          const double direct = sphere_symbol({n, s0 + k}, m);
          EXPECT_LT(rel(factored_symbol({n, s0}, k, m), direct), 1e-10) << n << " " << s0 << " " << k << " " << m;
        }
      }
    }
  }
}

TEST(SphereKernel, CalibratedConstantMatchesFlatNormalization) {
  // The calibrated kappa must equal C(n,s) 2^{-(n+2s)/2} with C(n,s) = 4^s Gamma(n/2+s)/(pi^{n/2}|Gamma(-s)|).
  for (int n : {1, 2, 3}) {
    for (double s : {0.2, 0.4}) {
      const FracParams p(n, s);
      const auto spec = calibrate_kernel(p);
      const double C = std::pow(4.0, s) * std::tgamma(0.5 * n + s) / (std::pow(std::numbers::pi, 0.5 * n) * std::abs(std::tgamma(-s)));
      EXPECT_LT(rel(spec.kappa, C * std::pow(2.0, -0.5 * (n + 2.0 * s))), 1e-10) << n << " " << s;
    }
  }
}

TEST(SphereKernel, Evaluation) {
  const auto spec = calibrate_kernel({2, 0.3});
  EXPECT_LT(rel(sphere_kernel(spec, -1.0), spec.kappa * std::pow(2.0, -0.5 * (2.0 + 0.6))), 1e-14);
  const double d = 1e-3;
  EXPECT_LT(rel(sphere_kernel(spec, 1.0 - 2.0 * d) / sphere_kernel(spec, 1.0 - d), std::pow(2.0, -0.5 * (2.0 + 0.6))), 1e-12);
  EXPECT_THROW(sphere_kernel(spec, 1.0), domain_error);
}

TEST(SphereKernel, ReproducesHigherDegreesOnCircle) {
  for (double s : {0.1, 0.25, 0.4}) {
    const auto spec = calibrate_kernel({1, s});
    for (int m = 2; m <= 8; ++m) EXPECT_LT(rel(kernel_symbol(spec, m), symbol(1, s, m)), 1e-6) << s << " " << m;
  }
}

TEST(SingularIntegral, ConstantGivesCurvature) {
  const auto spec = calibrate_kernel({1, 0.3});
  const std::vector<double> one(256, 1.0);
  const auto r = singular_integral_apply_circle(spec, one);
  for (double v : r.values) EXPECT_NEAR(v, spec.A, 1e-12);
}

TEST(SingularIntegral, CosineOnCircle) {
  const FracParams p(1, 0.35);
  const auto spec = calibrate_kernel(p);
  const ModeSpectrum f{1, {0.0, 1.0}};
  const auto u = sample_circle(f, 1024);
  const auto r = singular_integral_apply_circle(spec, u);
  const auto expected = sample_circle(apply_sphere(p, f), 1024);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(r.values[i], expected[i], 1e-6);
}

TEST(SingularIntegral, SpectralAgreementBandLimited) {
  for (double s : {0.1, 0.25, 0.45}) {
    const FracParams p(1, s);
    const auto spec = calibrate_kernel(p);
    ModeSpectrum f{1, {}};
    for (int m = 0; m <= 8; ++m) f.coeff.push_back(1.0 / (1.0 + m) * (m % 2 ? -1.0 : 1.0));
    const auto u = sample_circle(f, 4096);
    const auto r = singular_integral_apply_circle(spec, u);
    EXPECT_LT(rel_l2(r.values, sample_circle(apply_sphere(p, f), 4096)), 1e-6) << s;
  }
}

TEST(SingularIntegral, DegreeTwoOnS2) {
  const FracParams p(2, 0.4);
  const auto spec = calibrate_kernel(p);
  const auto gl = gauss_legendre(24);
  const ModeSpectrum f{2, {0.0, 0.0, 1.0}};
  const auto u = sample_zonal_s2(f, gl.x);
  const auto r = singular_integral_apply_s2(spec, u, gl);
  const double lambda = sphere_symbol(p, 2);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(r.values[i], lambda * u[i], 1e-5);
}

TEST(SingularIntegral, RejectsUnderResolvedInput) {
  const auto spec = calibrate_kernel({1, 0.3});
  ModeSpectrum f{1, std::vector<double>(31, 0.0)};
  f.coeff[30] = 1.0;
  EXPECT_THROW(singular_integral_apply_circle(spec, sample_circle(f, 64)), resolution_error);
}

TEST(YamabeQuotient, ConstantOnS2) {
  const FracParams p(2, 0.3);
  const auto gl = gauss_legendre(16);
  const std::vector<double> one(16, 1.0);
  EXPECT_LT(rel(yamabe_quotient_s2(p, one, gl), sphere_curvature(p) * std::pow(4.0 * std::numbers::pi, p.s)), 1e-12);
}

TEST(YamabeQuotient, ScaleInvariance) {
  const FracParams p(2, 0.6);
  const auto gl = gauss_legendre(20);
  std::vector<double> u(20), u2(20);
  for (std::size_t j = 0; j < u.size(); ++j) {
    u[j] = 1.0 + 0.2 * gl.x[j] + 0.1 * gl.x[j] * gl.x[j];
    u2[j] = 2.0 * u[j];
  }
  EXPECT_LT(rel(yamabe_quotient_s2(p, u2, gl), yamabe_quotient_s2(p, u, gl)), 1e-14);

  const FracParams q(1, 0.2);
  auto v = sample_circle({1, {1.0, 0.3, 0.1}}, 128);
  auto v2 = v;
  for (double& x : v2) x *= 2.0;
  EXPECT_LT(rel(yamabe_quotient_circle(q, v2), yamabe_quotient_circle(q, v)), 1e-14);
}

TEST(YamabeQuotient, RoundMetricIsLocalMinimum) {
  for (double s : {0.2, 0.5, 0.8}) {
    const FracParams p(2, s);
    const auto gl = gauss_legendre(24);
    const std::vector<double> one(24, 1.0);
    const double base = yamabe_quotient_s2(p, one, gl);
    for (double eps : {0.02, 0.05, 0.1}) {
      std::vector<double> u(24);
      for (std::size_t j = 0; j < u.size(); ++j) u[j] = 1.0 + eps * gl.x[j];
      EXPECT_GT(yamabe_quotient_s2(p, u, gl), base) << s << " " << eps;
    }
  }
}

TEST(YamabeQuotient, RejectsNonPositive) {
  const auto gl = gauss_legendre(8);
  std::vector<double> u(8, 1.0);
  u[3] = -0.1;
  EXPECT_THROW(yamabe_quotient_s2({2, 0.3}, u, gl), domain_error);
}
