#pragma once

#include "fingergan/random.hpp"
#include "fingergan/types.hpp"

namespace fingergan::procedural {

/// Ridge pattern from a phase field: a tilted plane wave, a smooth warp and
/// point dislocations (each adds or removes one ridge, creating a minutia),
/// masked by a soft ellipse on a white canvas.
struct PrintConfig {
  int width = 128;
  int height = 128;
  double period_min = 8.0;   ///< ridge period, pixels
  double period_max = 11.0;
  int dislocations_min = 4;
  int dislocations_max = 8;
  double warp_amplitude = 2.5;  ///< radians of phase
  double contrast = 0.45;

  void validate() const;
};

GrayImage generate_print(const PrintConfig& cfg, RandomSource& rng);

/// Clutter resembling latent backgrounds: multi-scale value-noise blotches
/// plus random dark strokes, values in [0.25, 1].
GrayImage generate_background(int width, int height, RandomSource& rng);

}  // namespace fingergan::procedural
