// Two sources at +-1: support edges from the characteristics, checked
// against sqrt(B+-), and the density at the merge point as t crosses 1.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "dyson/characteristics.hpp"
#include "dyson/spectral.hpp"

int main() {
  const auto mu = dyson::AtomicMeasure::two_source(1.0);
  std::printf("t,components,inner_edge,outer_edge,sqrt_Bminus,sqrt_Bplus,rho_at_0\n");
  for (double t : {0.25, 0.5, 0.75, 0.9, 0.99, 1.0, 1.01, 1.1, 1.5, 2.0}) {
    const auto s = dyson::support(mu, t);
    const auto [bp, bm] = dyson::b_plus_minus(t);
    const double inner = s.intervals.size() > 1 ? s.intervals.back().lo : 0.0;
    std::printf("%g,%zu,%.12f,%.12f,%.12f,%.12f,%.6f\n", t, s.intervals.size(), inner,
                s.intervals.back().hi, std::sqrt(bm), std::sqrt(bp),
                dyson::two_source_density(t, 0.0, 1.0));
  }

  // At t=1 the density vanishes like a cube root at x=0.
  std::printf("\nx,rho(1,x),sqrt(3) x^(1/3) / (2 pi)\n");
  for (double x : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5})
    std::printf("%g,%.10f,%.10f\n", x, dyson::two_source_density(1.0, x, 1.0),
                std::sqrt(3.0) * std::cbrt(x) / (2.0 * std::numbers::pi));
}
