/**
 * @file test_weightmap.cpp
 * @brief Unit tests for the minutia-weighted loss map
 *
 * Tests cover:
 * - Kernel values and sum against direct Gaussian evaluation
 * - Floor value w0 for the default sigma = 8, r = 17
 * - build_weight_map equals the double-loop oracle on random maps
 * - Single minutia: peak value, symmetry and radius of influence
 * - Empty map is uniformly w0
 */

#include <gtest/gtest.h>

#include "fingergan/random.hpp"
#include "fingergan/weightmap.hpp"
#include "../oracles.hpp"

namespace fingergan::weightmap {
namespace {

TEST(WeightMap, DefaultsAreSigma8Radius17) {
  const WeightMapParams p;
  EXPECT_EQ(p.sigma, 8.0);
  EXPECT_EQ(p.r, 17);
}

TEST(WeightMap, KernelMatchesGaussian) {
  const WeightMapParams p{3.0, 5};
  const RealGrid k = gaussian_kernel(p);
  ASSERT_EQ(k.width(), 11);
  double sum = 0.0;
  for (int v = -5; v <= 5; ++v) {
    for (int u = -5; u <= 5; ++u) {
      EXPECT_NEAR(k(u + 5, v + 5), oracle::gaussian(u, v, 3.0), 1e-15);
      sum += oracle::gaussian(u, v, 3.0);
    }
  }
  EXPECT_NEAR(kernel_sum(p), sum, 1e-13);
}

TEST(WeightMap, FloorValue) {
  const WeightMapParams p;
  double sum = 0.0;
  for (int v = -17; v <= 17; ++v) {
    for (int u = -17; u <= 17; ++u) sum += oracle::gaussian(u, v, 8.0);
  }
  EXPECT_NEAR(floor_value(p), oracle::gaussian(17, 17, 8.0) / sum, 1e-18);
  EXPECT_GT(floor_value(p), 0.0);
}

TEST(WeightMap, EqualsOracleOnRandomMaps) {
  RandomSource rng(1);
  for (int t = 0; t < 5; ++t) {
    MaskGrid m(40, 36, 0);
    const int count = static_cast<int>(rng.uniform_int(0, 12));
    for (int i = 0; i < count; ++i) m(static_cast<int>(rng.uniform_int(0, 39)), static_cast<int>(rng.uniform_int(0, 35))) = 1;
    const WeightMapParams p{rng.uniform(2.0, 9.0), static_cast<int>(rng.uniform_int(2, 17))};
    const RealGrid fast = build_weight_map(m, p), slow = oracle::weight_map(m, p.sigma, p.r);
    for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_NEAR(fast.values()[i], slow.values()[i], 1e-12);
  }
}

TEST(WeightMap, SingleMinutiaPeakAndSupport) {
  MaskGrid m(64, 64, 0);
  m(30, 30) = 1;
  const WeightMapParams p;
  const RealGrid w = build_weight_map(m, p);
  const double peak = oracle::gaussian(0, 0, 8.0) / kernel_sum(p);
  EXPECT_NEAR(w(30, 30), peak, 1e-15);
  EXPECT_NEAR(w(25, 33), w(35, 27), 1e-15);
  EXPECT_EQ(w(30 + 18, 30), floor_value(p));
  // The window corner carries exactly the floor value.
  EXPECT_NEAR(w(30 + 17, 30 + 17), floor_value(p), 1e-18);
}

TEST(WeightMap, EmptyMapIsFloor) {
  const RealGrid w = build_weight_map(MaskGrid(16, 16, 0));
  for (double v : w.values()) EXPECT_EQ(v, floor_value({}));
}

TEST(WeightMap, Validation) {
  EXPECT_THROW(gaussian_kernel({0.0, 3}), std::invalid_argument);
  EXPECT_THROW(gaussian_kernel({1.0, 0}), std::invalid_argument);
}

}  // namespace
}  // namespace fingergan::weightmap
