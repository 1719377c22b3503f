/**
 * @file test_losses.cpp
 * @brief Unit tests for the reconstruction and adversarial losses
 *
 * Tests cover:
 * - Weighted L1: per-sample pixel sum, batch mean, zero at g == out
 * - Reconstruction gradient against central differences off the kinks
 * - Adversarial losses against their closed forms, both generator forms
 * - Score clamping: finite losses and zero gradient at saturated scores
 * - Total generator loss weighting and input validation
 */

#include <gtest/gtest.h>

#include <cmath>

#include "fingergan/losses.hpp"
#include "fingergan/random.hpp"

namespace fingergan::losses {
namespace {

using nn::Tensor;

Tensor uniform_tensor(int n, int h, int w, RandomSource& rng, double lo, double hi) {
  Tensor t(n, 1, h, w);
  for (float& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

TEST(Reconstruction, SumOverPixelsMeanOverBatch) {
  Tensor out(2, 1, 1, 2), g(2, 1, 1, 2), w(2, 1, 1, 2);
  out.data = {0.0f, 0.5f, 1.0f, 0.25f};
  g.data = {1.0f, 0.5f, 0.0f, 0.75f};
  w.data = {2.0f, 3.0f, 1.0f, 4.0f};
  // Sample 0: 2*1 + 0 = 2; sample 1: 1*1 + 4*0.5 = 3.
  EXPECT_DOUBLE_EQ(reconstruction_loss(out, g, w), 2.5);
  EXPECT_DOUBLE_EQ(reconstruction_loss(g, g, w), 0.0);
}

TEST(Reconstruction, GradientMatchesFiniteDifferences) {
  RandomSource rng(1);
  const Tensor g = uniform_tensor(3, 8, 8, rng, 0.0, 1.0), w = uniform_tensor(3, 8, 8, rng, 0.1, 2.0);
  Tensor out = uniform_tensor(3, 8, 8, rng, 0.0, 1.0);
  const Tensor grad = reconstruction_grad(out, g, w);
  for (int p = 0; p < 100; ++p) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(out.size()) - 1));
    const float saved = out.data[i];
    if (std::abs(saved - g.data[i]) < 1e-2f) continue;  // too close to the kink
    const float up = saved + 1e-3f, down = saved - 1e-3f;
    out.data[i] = up;
    const double a = reconstruction_loss(out, g, w);
    out.data[i] = down;
    const double b = reconstruction_loss(out, g, w);
    out.data[i] = saved;
    const double fd = (a - b) / (static_cast<double>(up) - down);
    EXPECT_NEAR(fd, grad.data[i], 1e-4 * std::abs(fd) + 1e-7) << i;
  }
}

TEST(Reconstruction, SubgradientZeroAtEquality) {
  Tensor a(1, 1, 1, 1, 0.5f), w(1, 1, 1, 1, 3.0f);
  EXPECT_EQ(reconstruction_grad(a, a, w).data[0], 0.0f);
}

TEST(Reconstruction, RejectsShapeMismatch) {
  EXPECT_THROW(reconstruction_loss(Tensor(1, 1, 2, 2), Tensor(1, 1, 2, 3), Tensor(1, 1, 2, 2)), std::invalid_argument);
}

TEST(Adversarial, ClosedForms) {
  const std::vector<double> real{0.9, 0.6}, fake{0.2, 0.3};
  const auto ns = adversarial_losses(real, fake);
  const double d = -0.5 * (std::log(0.9) + std::log(0.8) + std::log(0.6) + std::log(0.7));
  EXPECT_NEAR(ns.d_loss, d, 1e-12);
  EXPECT_NEAR(ns.g_loss, -0.5 * (std::log(0.2) + std::log(0.3)), 1e-12);
  const auto sat = adversarial_losses(real, fake, GeneratorAdversarial::saturating);
  EXPECT_NEAR(sat.g_loss, 0.5 * (std::log(0.8) + std::log(0.7)), 1e-12);
  EXPECT_NEAR(sat.d_loss, d, 1e-12);
}

TEST(Adversarial, GradientsMatchFiniteDifferences) {
  RandomSource rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> real(4), fake(4);
    for (auto& r : real) r = rng.uniform(0.05, 0.95);
    for (auto& f : fake) f = rng.uniform(0.05, 0.95);
    std::vector<double> dr, df;
    d_loss_grad(real, fake, dr, df);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 4; ++i) {
      auto rp = real, rm = real, fp = fake, fm = fake;
      rp[i] += h;
      rm[i] -= h;
      fp[i] += h;
      fm[i] -= h;
      const double fd_r = (adversarial_losses(rp, fake).d_loss - adversarial_losses(rm, fake).d_loss) / (2 * h);
      const double fd_f = (adversarial_losses(real, fp).d_loss - adversarial_losses(real, fm).d_loss) / (2 * h);
      EXPECT_NEAR(fd_r, dr[i], 1e-6 * std::abs(dr[i]) + 1e-8);
      EXPECT_NEAR(fd_f, df[i], 1e-6 * std::abs(df[i]) + 1e-8);
      for (auto form : {GeneratorAdversarial::non_saturating, GeneratorAdversarial::saturating}) {
        const double fd_g =
            (adversarial_losses(real, fp, form).g_loss - adversarial_losses(real, fm, form).g_loss) / (2 * h);
        EXPECT_NEAR(fd_g, g_loss_grad(fake, form)[i], 1e-6 * std::abs(fd_g) + 1e-8);
      }
    }
  }
}

TEST(Adversarial, ClampedScoresStayFinite) {
  const std::vector<double> real{1.0, 0.0}, fake{0.0, 1.0};
  const auto l = adversarial_losses(real, fake);
  EXPECT_TRUE(std::isfinite(l.d_loss));
  EXPECT_TRUE(std::isfinite(l.g_loss));
  EXPECT_NEAR(l.g_loss, -0.5 * (std::log(kScoreEpsilon) + std::log(1 - kScoreEpsilon)), 1e-9);
  std::vector<double> dr, df;
  d_loss_grad(real, fake, dr, df);
  EXPECT_EQ(dr[0], 0.0);
  EXPECT_EQ(df[1], 0.0);
  EXPECT_EQ(g_loss_grad(fake)[0], 0.0);
}

TEST(Adversarial, Validation) {
  EXPECT_THROW(adversarial_losses({0.5}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(adversarial_losses({}, {}), std::invalid_argument);
  EXPECT_THROW(adversarial_losses({std::nan("")}, {0.5}), std::invalid_argument);
  EXPECT_THROW(g_loss_grad({}), std::invalid_argument);
}

TEST(Total, WeightsReconstructionByEta) {
  EXPECT_NEAR(total_generator_loss(1.0, 100.0, {}), 1.1, 1e-12);
  LossConfig c;
  c.eta = 0.5;
  EXPECT_DOUBLE_EQ(total_generator_loss(2.0, 4.0, c), 4.0);
  c.eta = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace fingergan::losses
