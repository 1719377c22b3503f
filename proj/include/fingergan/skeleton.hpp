#pragma once

#include "fingergan/minutia.hpp"
#include "fingergan/types.hpp"

namespace fingergan::skeleton {

enum class FrequencyMode { estimated, fixed };

struct GaborConfig {
  int block_size = 32;            ///< frequency estimation block, >= 8
  int kernel_radius = 8;
  double sigma_x = 4.0;           ///< envelope across ridges
  double sigma_y = 4.0;           ///< envelope along ridges
  FrequencyMode frequency_mode = FrequencyMode::estimated;
  double fixed_frequency = 1.0 / 9.0;  ///< cycles/pixel; also the estimation fallback
  int orientation_bins = 32;

  void validate() const;
};

/// Per-block ridge frequency from the x-signature: gray levels projected
/// along the ridge direction inside a window oriented across the ridges.
/// Blocks whose period falls outside [3,25] pixels or whose centre is
/// invalid take `fixed_frequency`. Returns one value per pixel.
RealGrid estimate_frequency(const GrayImage& img, const OrientationField& orient, const GaborConfig& cfg = {});

/// Orientation-tuned even Gabor filtering. The kernel at each pixel uses the
/// orientation bin nearest the local ridge direction and has zero DC, so the
/// output is unaffected by constant intensity offsets. Ridges stay dark;
/// pixels where the field is invalid are set to 1.
GrayImage enhance_gabor(const GrayImage& img, const OrientationField& orient, const GaborConfig& cfg = {});

struct BinarizeConfig {
  int block = 32;
  double min_variance = 1e-3;  ///< blocks with less intensity variance are background
};

/// Per-block Otsu threshold; dark pixels below the threshold become ridge.
SkeletonMap binarize(const GrayImage& img, const BinarizeConfig& cfg = {});

/// Zhang-Suen thinning followed by staircase removal. The result has no
/// fully-ridge 2x2 block and preserves 8-connectivity.
SkeletonMap thin(const SkeletonMap& binary);

/// binarize then thin.
SkeletonMap skeletonize(const GrayImage& enhanced, const BinarizeConfig& cfg = {});

/// Crossing number at a ridge pixel: half the number of 0/1 transitions
/// around the 8-neighbourhood.
int crossing_number(const SkeletonMap& skel, int x, int y);

struct MinutiaConfig {
  int spur_length = 8;        ///< branches shorter than this are pruned
  double border_distance = 10.0;
  int mask_block = 8;         ///< block size of the skeleton foreground mask
  int trace_length = 8;       ///< pixels followed to estimate a direction
  bool raw = false;           ///< skip pruning and border suppression
};

/// Removes ridge branches ending in a terminal shorter than `length` pixels,
/// including isolated short segments.
SkeletonMap prune_spurs(const SkeletonMap& skel, int length);

/// Foreground of the skeleton: blocks containing ridge pixels, closed with a
/// 3x3-block structuring element; outside the image counts as background.
MaskGrid skeleton_mask(const SkeletonMap& skel, int block);

/// CN = 1 gives an ending, CN = 3 a bifurcation. Ending angles point out of
/// the ridge; bifurcation angles point away from the stem, the branch left
/// after pairing the two branches closest in direction.
MinutiaSet extract_minutiae(const SkeletonMap& skel, const MinutiaConfig& cfg = {});

/// Binary grid with a 1 at each (rounded) minutia location. Throws
/// std::invalid_argument for minutiae outside the grid.
MaskGrid minutia_map(const MinutiaSet& mins, int width, int height);

}  // namespace fingergan::skeleton
