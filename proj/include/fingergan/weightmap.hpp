#pragma once

#include "fingergan/types.hpp"

namespace fingergan::weightmap {

struct WeightMapParams {
  double sigma = 8.0;
  int r = 17;  ///< half window; the kernel is (2r+1) x (2r+1)

  void validate() const;
};

/// w_g(u,v) = exp(-(u^2+v^2)/(2 sigma^2)) / (2 pi sigma^2) for u,v in [-r,r],
/// indexed as kernel(u+r, v+r). Not normalized.
RealGrid gaussian_kernel(const WeightMapParams& params);

/// Sum of all kernel entries.
double kernel_sum(const WeightMapParams& params);

/// Floor value w_g(r,r) / sum(w_g).
double floor_value(const WeightMapParams& params);

/// Normalized correlation of the kernel with the zero-padded minutia map,
/// before the floor substitution.
RealGrid correlate(const MaskGrid& minutia_map, const WeightMapParams& params);

/// w = w' where w' != 0, else the floor value.
RealGrid build_weight_map(const MaskGrid& minutia_map, const WeightMapParams& params = {});

}  // namespace fingergan::weightmap
