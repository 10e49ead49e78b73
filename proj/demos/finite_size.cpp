// KS distance to the t=1 semicircle as N grows, all particles started at 0.
//   demo_finite_size [beta] [seed]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "dyson/particle_sim.hpp"
#include "dyson/spectral.hpp"

int main(int argc, char** argv) {
  const double beta = argc > 1 ? std::atof(argv[1]) : 2.0;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  std::printf("N,ks,steps,rejected\n");
  for (std::size_t n : {25, 50, 100, 200, 400, 800}) {
    dyson::SimParams p{n, beta, 1e-3, seed, 1.0};
    dyson::SimStats stats;
    const auto out = dyson::simulate({std::vector<double>(n, 0.0), 0.0}, p, {1.0}, {}, &stats);
    const double ks =
        dyson::ks_distance(out.back(), [](double x) { return dyson::semicircle_cdf(1.0, x); });
    std::printf("%zu,%.5f,%zu,%zu\n", n, ks, stats.macro_steps, stats.rejected_substeps);
  }
}
