/**
 * @file test_distortion.cpp
 * @brief Unit tests for the plastic skin distortion model
 *
 * Tests cover:
 * - Transition profile g(h,k): endpoints, midpoint, monotonicity
 * - Ellipse distance sign and zero level set
 * - Rigid displacement against an explicit rotation matrix
 * - Identity distortion leaves images bit-exact
 * - Inside the ellipse the map is the identity; far outside it is rigid
 * - Parameter sampling stays inside the configured ranges
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fingergan/distortion.hpp"
#include "fingergan/random.hpp"

namespace fingergan::distortion {
namespace {

constexpr double kPi = std::numbers::pi;

DistortionParams centred(double theta_deg, Vec2 e) {
  DistortionParams p;
  p.k = 1.5;
  p.theta_deg = theta_deg;
  p.e = e;
  p.rotation_center = {32, 32};
  p.ellipse_center = {32, 32};
  p.s_x = 10;
  p.s_y = 14;
  return p;
}

TEST(Transition, EndpointsAndMidpoint) {
  for (double k : {0.5, 1.0, 2.0}) {
    EXPECT_EQ(gradual_transition(0.0, k), 0.0);
    EXPECT_EQ(gradual_transition(-3.0, k), 0.0);
    EXPECT_EQ(gradual_transition(k, k), 1.0);
    EXPECT_NEAR(gradual_transition(k / 2, k), 0.5, 1e-12);
    EXPECT_NEAR(gradual_transition(1e-12, k), 0.0, 1e-9);
    EXPECT_NEAR(gradual_transition(k - 1e-12, k), 1.0, 1e-9);
  }
}

TEST(Transition, MonotoneNondecreasing) {
  double prev = 0.0;
  for (int i = -10; i <= 110; ++i) {
    const double g = gradual_transition(i / 50.0, 2.0);
    ASSERT_GE(g, prev);
    prev = g;
  }
}

TEST(Ellipse, ZeroOnBoundaryAndSigned) {
  const DistortionParams p = centred(0, {});
  for (int i = 0; i < 32; ++i) {
    const double t = 2 * kPi * i / 32;
    const Vec2 b{32 + p.s_x * std::cos(t), 32 + p.s_y * std::sin(t)};
    EXPECT_NEAR(ellipse_distance(b, p), 0.0, 1e-6);
  }
  EXPECT_LT(ellipse_distance({32, 32}, p), 0.0);
  EXPECT_DOUBLE_EQ(ellipse_distance({32, 32}, p), -1.0);
  EXPECT_GT(ellipse_distance({60, 60}, p), 0.0);
}

TEST(Displacement, MatchesExplicitRotation) {
  RandomSource rng(1);
  for (int i = 0; i < 100; ++i) {
    const DistortionParams p = centred(rng.uniform(-10, 10), {rng.uniform(-5, 5), rng.uniform(-5, 5)});
    const Vec2 x{rng.uniform(0, 64), rng.uniform(0, 64)};
    const double t = p.theta_deg * kPi / 180;
    const double rx = std::cos(t) * (x.x - 32) + std::sin(t) * (x.y - 32) + 32 + p.e.x;
    const double ry = -std::sin(t) * (x.x - 32) + std::cos(t) * (x.y - 32) + 32 + p.e.y;
    const Vec2 d = displacement(x, p);
    EXPECT_NEAR(d.x, rx - x.x, 1e-9);
    EXPECT_NEAR(d.y, ry - x.y, 1e-9);
  }
}

TEST(ForwardMap, IdentityInsideEllipseRigidFarOutside) {
  const DistortionParams p = centred(4, {3, -2});
  const Vec2 inside{33, 30};
  const Vec2 fi = forward_map(inside, p);
  EXPECT_EQ(fi.x, inside.x);
  EXPECT_EQ(fi.y, inside.y);
  const Vec2 far{200, 5};
  const Vec2 ff = forward_map(far, p), d = displacement(far, p);
  EXPECT_DOUBLE_EQ(ff.x, far.x + d.x);
  EXPECT_DOUBLE_EQ(ff.y, far.y + d.y);
}

TEST(DistortImage, IdentityParametersAreBitExact) {
  RandomSource rng(2);
  GrayImage img(40, 30);
  for (double& v : img.values()) v = rng.uniform01();
  const DistortionParams p = centred(0, {0, 0});
  EXPECT_TRUE(distort_image(img, p) == img);
}

TEST(DistortImage, PureTranslationShiftsFarRegion) {
  GrayImage img(64, 64, 1.0);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) img(x, y) = (x % 8) / 8.0;
  }
  DistortionParams p = centred(0, {2, 0});
  p.s_x = 2;
  p.s_y = 2;
  p.k = 0.01;
  const GrayImage out = distort_image(img, p);
  // Far from the ellipse the inverse map is q - e exactly.
  EXPECT_NEAR(out(10, 5), img(8, 5), 1e-12);
  EXPECT_NEAR(out(60, 50), img(58, 50), 1e-12);
}

TEST(Bilinear, InterpolatesAndReadsOutside) {
  RealGrid g(2, 2, 0.0);
  g(1, 0) = 1.0;
  g(0, 1) = 2.0;
  g(1, 1) = 3.0;
  EXPECT_DOUBLE_EQ(bilinear_sample(g, 0.5, 0.5, 9.0), 1.5);
  EXPECT_DOUBLE_EQ(bilinear_sample(g, 1.0, 1.0, 9.0), 3.0);
  EXPECT_DOUBLE_EQ(bilinear_sample(g, -5, 0, 9.0), 9.0);
}

TEST(Sampling, WithinRanges) {
  DistortionParamRanges r;
  RandomSource rng(3);
  for (int i = 0; i < 500; ++i) {
    const DistortionParams p = sample_distortion(r, rng, 100, 80);
    ASSERT_GE(p.k, r.k_min);
    ASSERT_LE(p.k, r.k_max);
    ASSERT_GE(p.theta_deg, r.theta_min_deg);
    ASSERT_LE(p.theta_deg, r.theta_max_deg);
    ASSERT_GE(p.s_x, r.sx_min_frac * 50);
    ASSERT_LE(p.s_x, r.sx_max_frac * 50);
    ASSERT_GE(p.s_y, p.s_x);
    ASSERT_LE(p.s_y, r.sy_max_ratio * p.s_x);
    ASSERT_GE(p.e.x, r.e_min);
    ASSERT_LE(p.e.y, r.e_max);
  }
}

TEST(Validation, RejectsBadParameters) {
  DistortionParams p = centred(0, {});
  p.k = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  DistortionParamRanges r;
  r.sy_max_ratio = 0.5;
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace fingergan::distortion
