#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dyson/particle_sim.hpp"

using namespace dyson;

namespace {

std::vector<double> brute_force_drift(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) v[i] += 1.0 / (x[i] - x[j]) / static_cast<double>(n);
  return v;
}

ParticleState at_origin(std::size_t n, double c = 0.0) { return {std::vector<double>(n, c), 0.0}; }

}  // namespace

TEST(Drift, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (std::size_t n : {2u, 3u, 7u, 64u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    std::vector<double> v;
    dyson_drift(x, v);
    const auto ref = brute_force_drift(x);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(v[i], ref[i], 1e-12 * (1.0 + std::abs(ref[i])));
  }
}

TEST(Drift, TwoParticlesRepelSymmetrically) {
  std::vector<double> v;
  dyson_drift({-1.0, 1.0}, v);
  EXPECT_DOUBLE_EQ(v[0], -0.25);
  EXPECT_DOUBLE_EQ(v[1], 0.25);
}

TEST(Drift, SumsToZero) {
  std::vector<double> x{-3.0, -0.2, 0.1, 0.5, 4.0}, v;
  dyson_drift(x, v);
  double s = 0.0;
  for (double d : v) s += d;
  EXPECT_NEAR(s, 0.0, 1e-15);
}

TEST(Noise, DeterministicPerKey) {
  NoiseStream a(42), b(42), c(43);
  EXPECT_EQ(a.gaussian(5, 7, 3), b.gaussian(5, 7, 3));
  EXPECT_NE(a.gaussian(5, 7, 3), c.gaussian(5, 7, 3));
  EXPECT_NE(a.gaussian(5, 7, 3), a.gaussian(5, 8, 3));
  EXPECT_NE(a.gaussian(5, 7, 3), a.gaussian(6, 7, 3));
}

TEST(Noise, StandardNormalMoments) {
  NoiseStream s(9);
  const int n = 200000;
  double m = 0.0, m2 = 0.0, m4 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double g = s.gaussian(static_cast<std::uint64_t>(k), 0);
    m += g;
    m2 += g * g;
    m4 += g * g * g * g;
  }
  EXPECT_NEAR(m / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 1.0, 0.015);
  EXPECT_NEAR(m4 / n, 3.0, 0.1);
}

TEST(Jitter, SpreadsCoincidentRunsSymmetrically) {
  std::vector<double> x{0.0, 0.0, 0.0, 2.0};
  EXPECT_TRUE(jitter_coincident(x, 1e-8));
  EXPECT_DOUBLE_EQ(x[0], -1e-8);
  EXPECT_DOUBLE_EQ(x[1], 0.0);
  EXPECT_DOUBLE_EQ(x[2], 1e-8);
  EXPECT_DOUBLE_EQ(x[3], 2.0);
  EXPECT_FALSE(jitter_coincident(x, 1e-8));
}

TEST(Simulate, SingleParticleIsBrownian) {
  // dX = sqrt(2/beta) dB, so Var X_1 = 2/beta.
  const int runs = 3000;
  double m = 0.0, m2 = 0.0;
  for (int s = 0; s < runs; ++s) {
    SimParams p{1, 4.0, 0.05, static_cast<std::uint64_t>(s), 1.0};
    const double x = simulate(at_origin(1), p, {1.0}).back().positions[0];
    m += x;
    m2 += x * x;
  }
  m /= runs;
  const double var = m2 / runs - m * m;
  EXPECT_NEAR(m, 0.0, 4.0 * std::sqrt(0.5 / runs));
  EXPECT_NEAR(var, 0.5, 4.0 * 0.5 * std::sqrt(2.0 / runs));
}

TEST(Simulate, SecondMomentGrowsLinearly) {
  // Ito: E (1/N) sum x^2 = t ((N-1)/N + 2/(beta N)), which is t for beta = 2.
  const std::size_t n = 100;
  double acc = 0.0;
  const int runs = 8;
  for (int s = 0; s < runs; ++s) {
    SimParams p{n, 2.0, 1e-3, static_cast<std::uint64_t>(100 + s), 0.5};
    const auto st = simulate(at_origin(n), p, {0.5}).back();
    double m2 = 0.0;
    for (double x : st.positions) m2 += x * x;
    acc += m2 / static_cast<double>(n);
  }
  EXPECT_NEAR(acc / runs, 0.5, 0.02);
}

TEST(Simulate, ReproducibleForFixedSeed) {
  SimParams p{50, 2.0, 1e-3, 7, 0.3};
  const auto a = simulate(at_origin(50), p, {0.1, 0.3});
  const auto b = simulate(at_origin(50), p, {0.1, 0.3});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].positions, b[0].positions);
  EXPECT_EQ(a[1].positions, b[1].positions);
  p.seed = 8;
  EXPECT_NE(simulate(at_origin(50), p, {0.3}).back().positions, a[1].positions);
}

TEST(Simulate, KeepsParticlesStrictlyOrdered) {
  SimParams p{200, 1.0, 1e-3, 3, 0.5};
  SimStats stats;
  const auto st = simulate(at_origin(200), p, {0.5}, {}, &stats).back();
  for (std::size_t i = 1; i < st.size(); ++i) EXPECT_LT(st.positions[i - 1], st.positions[i]);
  EXPECT_DOUBLE_EQ(st.time, 0.5);
  EXPECT_GT(stats.accepted_substeps, 0u);
}

TEST(Simulate, TranslationCovariantInLaw) {
  ParticleState a{{}, 0.0}, b{{}, 0.0};
  for (int s = 0; s < 20; ++s) {
    SimParams p{40, 2.0, 1e-3, static_cast<std::uint64_t>(s), 0.2};
    const auto ra = simulate(at_origin(40), p, {0.2});
    for (double x : ra.back().positions) a.positions.push_back(x);
    p.seed += 1000;
    const auto rb = simulate(at_origin(40, 3.0), p, {0.2});
    for (double x : rb.back().positions) b.positions.push_back(x - 3.0);
  }
  EXPECT_LT(ks_distance(a, b), 0.06);
}

TEST(Clusters, BetaHermiteSecondMoment) {
  // E sum mu^2 = m + beta m (m - 1) / 2
  boost::random::mt19937_64 rng(5);
  for (double beta : {1.0, 2.0, 4.0}) {
    const std::size_t m = 30;
    double acc = 0.0;
    const int runs = 400;
    for (int r = 0; r < runs; ++r)
      for (double v : beta_hermite(m, beta, rng)) acc += v * v;
    const double want = m + beta * m * (m - 1) / 2.0;
    EXPECT_NEAR(acc / runs / want, 1.0, 0.01);
  }
}

TEST(Clusters, SpreadKeepsCentresAndOrder) {
  std::vector<double> x{-1.0, -1.0, -1.0, 2.0, 2.0};
  spread_clusters(x, 1e-4, 2.0, 9);
  EXPECT_TRUE(std::is_sorted(x.begin(), x.end()));
  EXPECT_FALSE(has_coincident(x));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x[i], -1.0, 0.05);
  for (std::size_t i = 3; i < 5; ++i) EXPECT_NEAR(x[i], 2.0, 0.05);
  EXPECT_EQ(distinct_gap({0.0, 0.0, 1.5, 4.0}), 1.5);
}

TEST(Simulate, SmallSystemApproachesSemicircle) {
  SimParams p{300, 2.0, 1e-3, 5, 1.0};
  const auto st = simulate(at_origin(300), p, {1.0}).back();
  const double ks = ks_distance(st, [](double x) {
    const double y = std::clamp(x / 2.0, -1.0, 1.0);
    return 0.5 + (y * std::sqrt(1.0 - y * y) + std::asin(y)) / std::numbers::pi;
  });
  EXPECT_LT(ks, 0.08);
}

TEST(Simulate, RejectsInvalidParameters) {
  SimParams p{10, 0.5, 1e-3, 0, 1.0};
  try {
    simulate(at_origin(10), p, {1.0});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field, "sim.beta");
  }
  EXPECT_THROW(simulate(at_origin(10), {0, 2.0, 1e-3, 0, 1.0}, {1.0}), ValidationError);
  EXPECT_THROW(simulate(at_origin(10), {10, 2.0, 0.0, 0, 1.0}, {1.0}), ValidationError);
  EXPECT_THROW(simulate(at_origin(9), {10, 2.0, 1e-3, 0, 1.0}, {1.0}), ValidationError);
  EXPECT_THROW(simulate(at_origin(10), {10, 2.0, 1e-3, 0, 1.0}, {0.5, 0.2}), ValidationError);
  EXPECT_THROW(simulate(at_origin(10), {10, 2.0, 1e-3, 0, 1.0}, {2.0}), ValidationError);
}

TEST(StepDyson, NoiselessStepFollowsDrift) {
  SimParams p{2, 2.0, 1e-4, 0, 1.0};
  const auto next = step_dyson({{-1.0, 1.0}, 0.0}, p, {0.0, 0.0});
  EXPECT_NEAR(next.positions[1], 1.0 + 0.25e-4, 1e-15);
  EXPECT_NEAR(next.positions[0], -1.0 - 0.25e-4, 1e-15);
  EXPECT_DOUBLE_EQ(next.time, 1e-4);
  EXPECT_THROW(step_dyson({{-1.0, 1.0}, 0.0}, p, {0.0}), ValidationError);
  EXPECT_THROW(step_dyson({{1.0, -1.0}, 0.0}, p, {0.0, 0.0}), ValidationError);
}

TEST(StepDyson, CollisionCourseIsRefinedNotCrossed) {
  // A noise kick that would swap the pair triggers bridge halving.
  SimParams p{2, 1.0, 1e-2, 4, 1.0};
  const auto next = step_dyson({{-0.01, 0.01}, 0.0}, p, {3.0, -3.0});
  EXPECT_LT(next.positions[0], next.positions[1]);
}

TEST(EmpiricalDensity, HasUnitMassAndNamesOutliers) {
  ParticleState s{{-0.9, -0.1, 0.2, 0.25, 0.8}, 1.0};
  const auto d = empirical_density(s, -1.0, 1.0, 8);
  EXPECT_NEAR(d.mass(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.values[0], 1.0 / (5 * 0.25));
  s.positions[3] = 1.5;
  try {
    empirical_density(s, -1.0, 1.0, 8);
    FAIL() << "expected RangeError";
  } catch (const RangeError& e) {
    EXPECT_EQ(e.index, 3u);
    EXPECT_DOUBLE_EQ(e.value, 1.5);
  }
}

TEST(KsDistance, HandComputedValues) {
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_DOUBLE_EQ(ks_distance(ParticleState{{0.5}, 0.0}, uniform), 0.5);
  EXPECT_DOUBLE_EQ(ks_distance(ParticleState{{0.25, 0.75}, 0.0}, uniform), 0.25);
  EXPECT_DOUBLE_EQ(ks_distance(ParticleState{{0.1, 0.2}, 0.0}, ParticleState{{0.1, 0.2}, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance(ParticleState{{0.1, 0.2}, 0.0}, ParticleState{{0.3, 0.4}, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(ks_distance(ParticleState{{0.1, 0.3}, 0.0}, ParticleState{{0.2, 0.4}, 0.0}), 0.5);
}
