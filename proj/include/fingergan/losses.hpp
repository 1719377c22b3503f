#pragma once

#include <vector>

#include "fingergan/nn/tensor.hpp"

namespace fingergan::losses {

/// Scores are clamped to [eps, 1 - eps] before taking logarithms.
inline constexpr double kScoreEpsilon = 1e-7;

enum class GeneratorAdversarial { non_saturating, saturating };

struct LossConfig {
  double eta = 0.001;  ///< weight of the reconstruction term
  GeneratorAdversarial generator_form = GeneratorAdversarial::non_saturating;

  void validate() const;
};

/// Per-sample sum over pixels of w |g - out|, averaged over the batch.
double reconstruction_loss(const nn::Tensor& out, const nn::Tensor& g, const nn::Tensor& w);
/// dL/dout of reconstruction_loss; the subgradient at out == g is 0.
nn::Tensor reconstruction_grad(const nn::Tensor& out, const nn::Tensor& g, const nn::Tensor& w);

struct AdversarialLosses {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

/// d_loss = -mean[log D(real) + log(1 - D(fake))]; real and fake batches pair
/// up index by index. g_loss = -mean log D(fake), or mean log(1 - D(fake)) in
/// the saturating form.
AdversarialLosses adversarial_losses(const std::vector<double>& real, const std::vector<double>& fake,
                                     GeneratorAdversarial form = GeneratorAdversarial::non_saturating);

/// Gradients of d_loss with respect to each real and fake score.
void d_loss_grad(const std::vector<double>& real, const std::vector<double>& fake, std::vector<double>& d_real,
                 std::vector<double>& d_fake);
/// Gradient of g_loss with respect to each fake score.
std::vector<double> g_loss_grad(const std::vector<double>& fake,
                                GeneratorAdversarial form = GeneratorAdversarial::non_saturating);

/// g_adv + eta * l_r.
double total_generator_loss(double g_adv, double l_r, const LossConfig& cfg);

}  // namespace fingergan::losses
