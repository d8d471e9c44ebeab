// Walk through the main entry points for n = 3, s = 1/2.
#include <cstdio>

#include "conflap/conflap.hpp"

int main() {
  using namespace conflap;
  const FracParams p(3, 0.5);

  std::printf("sphere: Q_s = %.6f, P_s on degree 2 = %.6f\n", sphere::sphere_curvature(p), sphere::sphere_symbol(p, 2));
  std::printf("cylinder: c_ns = %.6f, Theta(1) = %.6f\n", cylinder::cyl_curvature(p), cylinder::cyl_symbol(p, 0, 1.0));

  const auto spec = cylinder::calibrate_kernel(p);
  std::printf("cylinder kernel: normalization = %.12f (residual %.1e)\n", spec.normalization, spec.calibration.residual);

  const double L0 = delaunay::bifurcation_period(p);
  std::printf("bifurcation period L0 = %.10f\n", L0);

  const auto sol = delaunay::solve_delaunay(p, 1.5 * L0);
  std::printf("Delaunay at 1.5 L0: residual %.1e, energy %.6f, nonconstant %s\n", sol.residual, sol.energy,
              sol.nonconstant ? "yes" : "no");

  const auto dtn = extension::check_dtn(0.5, 2.0);
  std::printf("extension D-t-N at xi = 2: %.6f vs %.6f\n", dtn.dtn, dtn.exact);
  return 0;
}
