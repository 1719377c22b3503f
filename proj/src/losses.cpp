#include "fingergan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fingergan::losses {
namespace {

double clamp_score(double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("adversarial loss: non-finite score");
  return std::clamp(s, kScoreEpsilon, 1.0 - kScoreEpsilon);
}

// Derivative of the clamp: zero where the score was clamped.
bool inside(double s) { return s > kScoreEpsilon && s < 1.0 - kScoreEpsilon; }

void require_batch(const std::vector<double>& real, const std::vector<double>& fake) {
  if (real.size() != fake.size() || real.empty()) {
    throw std::invalid_argument("adversarial loss: real and fake batches must be non-empty and equal in size");
  }
}

void require_shapes(const nn::Tensor& out, const nn::Tensor& g, const nn::Tensor& w) {
  if (!out.same_shape(g) || !out.same_shape(w) || out.n < 1) {
    throw std::invalid_argument("reconstruction loss: shapes differ (" + out.shape_string() + ", " + g.shape_string() +
                                ", " + w.shape_string() + ")");
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("loss: eta must be finite and >= 0");
}

double reconstruction_loss(const nn::Tensor& out, const nn::Tensor& g, const nn::Tensor& w) {
  require_shapes(out, g, w);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    sum += static_cast<double>(w.data[i]) * std::abs(static_cast<double>(g.data[i]) - out.data[i]);
  }
  return sum / out.n;
}

nn::Tensor reconstruction_grad(const nn::Tensor& out, const nn::Tensor& g, const nn::Tensor& w) {
  require_shapes(out, g, w);
  nn::Tensor d(out.n, out.c, out.h, out.w);
  const double inv_n = 1.0 / out.n;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double diff = static_cast<double>(out.data[i]) - g.data[i];
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    d.data[i] = static_cast<float>(w.data[i] * sign * inv_n);
  }
  return d;
}

AdversarialLosses adversarial_losses(const std::vector<double>& real, const std::vector<double>& fake,
                                     GeneratorAdversarial form) {
  require_batch(real, fake);
  AdversarialLosses l;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const double r = clamp_score(real[i]), f = clamp_score(fake[i]);
    l.d_loss -= std::log(r) + std::log1p(-f);
    l.g_loss += form == GeneratorAdversarial::non_saturating ? -std::log(f) : std::log1p(-f);
  }
  const auto n = static_cast<double>(real.size());
  l.d_loss /= n;
  l.g_loss /= n;
  return l;
}

void d_loss_grad(const std::vector<double>& real, const std::vector<double>& fake, std::vector<double>& d_real,
                 std::vector<double>& d_fake) {
  require_batch(real, fake);
  const auto n = static_cast<double>(real.size());
  d_real.assign(real.size(), 0.0);
  d_fake.assign(fake.size(), 0.0);
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (inside(real[i])) d_real[i] = -1.0 / (real[i] * n);
    if (inside(fake[i])) d_fake[i] = 1.0 / ((1.0 - fake[i]) * n);
  }
}

std::vector<double> g_loss_grad(const std::vector<double>& fake, GeneratorAdversarial form) {
  if (fake.empty()) throw std::invalid_argument("adversarial loss: empty fake batch");
  const auto n = static_cast<double>(fake.size());
  std::vector<double> d(fake.size(), 0.0);
  for (std::size_t i = 0; i < fake.size(); ++i) {
    if (!inside(fake[i])) continue;
    d[i] = form == GeneratorAdversarial::non_saturating ? -1.0 / (fake[i] * n) : -1.0 / ((1.0 - fake[i]) * n);
  }
  return d;
}

double total_generator_loss(double g_adv, double l_r, const LossConfig& cfg) { return g_adv + cfg.eta * l_r; }

}  // namespace fingergan::losses
