#pragma once

#include <functional>
#include <vector>

#include "fingergan/types.hpp"

namespace fingergan::tv {

struct TVConfig {
  double fidelity_weight = 0.15;  ///< lambda in TV(u) + lambda/2 |u - f|^2
  int max_iters = 100;
  double tolerance = 1e-4;        ///< stop when max |p_{n+1} - p_n| falls below this
  double step = 0.125;            ///< Chambolle dual step, <= 1/8

  void validate() const;
};

/// Affine map applied to the signed texture before it is used as a network
/// input: stored = offset + scale * texture.
struct TextureScaling {
  double offset = 0.5;
  double scale = 0.5;
};

struct Decomposition {
  GrayImage cartoon;
  RealGrid texture;        ///< signed, input - cartoon (exact for lattice inputs)
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective;  ///< ROF objective of each iterate, when tracked

  GrayImage scaled_texture(TextureScaling scaling = {}) const;
};

/// Isotropic discrete total variation with forward differences.
double total_variation(const RealGrid& u);
/// TV(u) + lambda/2 * |u - f|^2.
double rof_objective(const RealGrid& u, const RealGrid& f, double lambda);

/// ROF cartoon/texture split via Chambolle's dual projection. When
/// `track_objective` is set, `objective` holds the primal objective of every
/// iterate u_n = f - div(p_n)/lambda, starting from n = 0.
Decomposition decompose(const GrayImage& img, const TVConfig& cfg = {}, bool track_objective = false);

/// Convenience: decompose and return the rescaled texture.
GrayImage texture_component(const GrayImage& img, const TVConfig& cfg = {}, TextureScaling scaling = {});

}  // namespace fingergan::tv
