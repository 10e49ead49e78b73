#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dyson/characteristics.hpp"
#include "dyson/spectral.hpp"

using namespace dyson;

namespace {

AtomicMeasure three_atoms() { return AtomicMeasure({{-1.5, 0.2}, {0.3, 0.5}, {2.0, 0.3}}); }

double boundary_density(const AtomicMeasure& mu, double t, double x) {
  return -green_functional(mu, t, ComplexPoint::boundary(x)).imag() / std::numbers::pi;
}

}  // namespace

TEST(Map, IdentityAtTimeZeroAndDerivativeMatchesDifference) {
  const AtomicMeasure mu = three_atoms();
  EXPECT_EQ(characteristic_map(mu, 0.0, 0.7), 0.7);
  for (double x0 : {-3.0, -0.4, 1.1, 2.6}) {
    const double h = 1e-6;
    const double fd = (characteristic_map(mu, 0.8, x0 + h) - characteristic_map(mu, 0.8, x0 - h)) / (2 * h);
    EXPECT_NEAR(characteristic_map_derivative(mu, 0.8, x0), fd, 1e-6);
  }
  EXPECT_THROW(characteristic_map(mu, 0.5, 0.3), PoleError);
  EXPECT_THROW(characteristic_map(mu, -0.5, 1.0), ValidationError);
}

TEST(Map, TraceIsStraightLine) {
  const AtomicMeasure mu = AtomicMeasure::two_source(1.0);
  const auto c = trace_characteristic(mu, 2.0, 1.5, 8);
  ASSERT_EQ(c.samples.size(), 8u);
  // G(0, 2) = 0.5/3 + 0.5/1
  EXPECT_DOUBLE_EQ(c.g0, 0.5 / 3.0 + 0.5);
  for (const auto& [s, x] : c.samples) EXPECT_NEAR(x, 2.0 + s * c.g0, 1e-15);
  EXPECT_DOUBLE_EQ(c.samples.back().first, 1.5);
}

TEST(Breakdown, OneSourceLaunchPointsAndEdges) {
  for (double t : {0.1, 1.0, 4.0}) {
    const auto c = breakdown_points(AtomicMeasure::one_source(), t);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0], -std::sqrt(t), 1e-14 * std::sqrt(t));
    EXPECT_NEAR(c[1], std::sqrt(t), 1e-14 * std::sqrt(t));
    const auto s = support(AtomicMeasure::one_source(), t);
    ASSERT_EQ(s.intervals.size(), 1u);
    EXPECT_NEAR(s.intervals[0].lo, -2.0 * std::sqrt(t), 1e-12);
    EXPECT_NEAR(s.intervals[0].hi, 2.0 * std::sqrt(t), 1e-12);
  }
}

TEST(Breakdown, PointsAreRootsOfMapDerivative) {
  const AtomicMeasure mu = three_atoms();
  for (double t : {0.05, 0.3, 1.0, 3.0}) {
    const auto c = breakdown_points(mu, t);
    EXPECT_EQ(c.size() % 2, 0u);
    for (double x0 : c) EXPECT_NEAR(characteristic_map_derivative(mu, t, x0), 0.0, 1e-11);
  }
}

TEST(Breakdown, TwoSourceTangencyAtMergeTime) {
  const auto c = breakdown_points(AtomicMeasure::two_source(1.0), 1.0);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[1], c[2]);
  EXPECT_NEAR(c[1], 0.0, 1e-15);
  const auto s = support(AtomicMeasure::two_source(1.0), 1.0);
  ASSERT_EQ(s.intervals.size(), 1u);
  ASSERT_EQ(s.interior_critical.size(), 1u);
  EXPECT_NEAR(s.interior_critical[0], 0.0, 1e-15);
  EXPECT_NEAR(s.intervals[0].hi, 1.5 * std::sqrt(3.0), 1e-12);
}

TEST(Support, TwoSourceEdgesFollowBPlusMinus) {
  for (double t : {0.1, 0.5, 0.99, 1.5, 3.0}) {
    const auto [bp, bm] = b_plus_minus(t);
    const auto s = support(AtomicMeasure::two_source(1.0), t);
    EXPECT_NEAR(s.intervals.back().hi, std::sqrt(bp), 1e-10);
    EXPECT_NEAR(s.intervals.front().lo, -std::sqrt(bp), 1e-10);
    if (t < 1.0) {
      ASSERT_EQ(s.intervals.size(), 2u);
      EXPECT_NEAR(s.intervals[1].lo, std::sqrt(bm), 1e-10);
    } else {
      EXPECT_EQ(s.intervals.size(), 1u);
      EXPECT_EQ(bm, 0.0);
    }
  }
  const auto [bp1, bm1] = b_plus_minus(1.0);
  EXPECT_NEAR(bp1, 27.0 / 4.0, 1e-12);
  EXPECT_EQ(bm1, 0.0);
}

TEST(Support, ThreeAtomsMergeOverTime) {
  const AtomicMeasure mu = three_atoms();
  EXPECT_EQ(support(mu, 0.01).intervals.size(), 3u);
  EXPECT_EQ(support(mu, 10.0).intervals.size(), 1u);
  const auto s = support(mu, 0.2);
  for (std::size_t k = 1; k < s.intervals.size(); ++k) EXPECT_LT(s.intervals[k - 1].hi, s.intervals[k].lo);
}

TEST(Support, DensityPositiveInsideAndZeroOutside) {
  const AtomicMeasure mu = three_atoms();
  for (double t : {0.1, 0.6}) {
    const auto s = support(mu, t);
    for (const auto& iv : s.intervals) {
      EXPECT_GT(boundary_density(mu, t, iv.mid()), 1e-3);
      EXPECT_LT(boundary_density(mu, t, iv.hi + 0.05), 1e-10);
      EXPECT_LT(boundary_density(mu, t, iv.lo - 0.05), 1e-10);
    }
  }
}

TEST(Support, ComplementOfInjectiveImage) {
  for (const auto& mu : {AtomicMeasure::one_source(), AtomicMeasure::two_source(1.0), three_atoms()})
    for (double t : {0.3, 1.0, 2.0}) {
      const auto img = injective_image(mu, t);
      EXPECT_TRUE(std::isinf(img.front().lo));
      EXPECT_TRUE(std::isinf(img.back().hi));
      EXPECT_TRUE(complementarity_violations(mu, t, Grid{-6.0, 6.0, 2001}).empty());
    }
}

TEST(Constancy, GreenIsConstantAlongCharacteristics) {
  const AtomicMeasure mu = three_atoms();
  const GreenFn g = [&mu](double s, const ComplexPoint& z) { return green_functional(mu, s, z); };
  EXPECT_LT(verify_constancy(mu, 0.5, -4.0, g), 1e-10);
  EXPECT_LT(verify_constancy(mu, 0.5, 4.5, g), 1e-10);
  // Launch point next to an atom, where M_t already folds over.
  EXPECT_THROW(verify_constancy(mu, 0.5, 0.35, g), ValidationError);
  EXPECT_THROW(verify_constancy(mu, 0.5, 0.3, g), PoleError);
}
