#pragma once

#include <vector>

#include "fingergan/distortion.hpp"
#include "fingergan/minutia.hpp"
#include "fingergan/orientation.hpp"
#include "fingergan/random.hpp"
#include "fingergan/skeleton.hpp"
#include "fingergan/tvdecomp.hpp"
#include "fingergan/types.hpp"
#include "fingergan/weightmap.hpp"

namespace fingergan::synthesis {

struct SpeckleParams {
  double variance = 0.01;  ///< variance of the multiplicative noise n, >= 0

  void validate() const;
};

/// One draw of n: uniform on [-a, a] with a = sqrt(3 variance).
double speckle_noise(double variance, RandomSource& rng);

/// b'' = b' + n b' per pixel, clamped to [0,1].
GrayImage add_speckle(const GrayImage& img, const SpeckleParams& params, RandomSource& rng);

struct FusionParams {
  double lambda = 0.5;   ///< [0,1]; sampled from [0.2,0.8] by the pipeline
  GrayImage background;  ///< crop d, same dims as the print

  void validate() const;
};

/// c = (1 - lambda) b'' + lambda d.
GrayImage fuse_background(const GrayImage& speckled, const FusionParams& params);

struct SynthesisRanges {
  distortion::DistortionParamRanges distortion;
  double variance_min = 0.0;   ///< speckle variance drawn from [min, max)
  double variance_max = 0.02;
  double lambda_min = 0.2;
  double lambda_max = 0.8;

  void validate() const;
};

/// Parameters drawn for one synthesized latent.
struct LatentDraw {
  distortion::DistortionParams distortion;
  double variance = 0.0;
  double lambda = 0.0;
  std::size_t background_index = 0;
  int crop_x = 0;
  int crop_y = 0;
};

struct LatentSynthesis {
  GrayImage image;  ///< c
  LatentDraw draw;
};

/// Uniform crop of `width` x `height` at a random offset.
GrayImage crop(const GrayImage& img, int x, int y, int width, int height);

/// distort -> speckle -> fuse, every parameter sampled independently.
/// Requires at least one background no smaller than the print.
LatentSynthesis synthesize_latent(const GrayImage& rolled, const SynthesisRanges& ranges,
                                  const std::vector<GrayImage>& backgrounds, RandomSource& rng);

struct QualityConfig {
  double min_mean_coherence = 0.5;
  orientation::RawOrientationConfig orientation;
};

/// Mean block coherence over valid blocks; 0 when no block is valid.
double mean_coherence(const GrayImage& img, const QualityConfig& cfg = {});
bool passes_quality(const GrayImage& img, const QualityConfig& cfg = {});

struct PairConfig {
  SynthesisRanges ranges;
  tv::TVConfig tv;
  tv::TextureScaling scaling;
  orientation::DenseOrientationConfig enhance_orientation;
  skeleton::GaborConfig gabor;
  skeleton::BinarizeConfig binarize;
  skeleton::MinutiaConfig minutiae;
  orientation::RawOrientationConfig gt_orientation;
  orientation::FomfeConfig fomfe{4, 8, 1e-8};  ///< denser sampling for small prints
  weightmap::WeightMapParams weights;
  int latents_per_print = 10;

  void validate() const;
};

/// Ground truths shared by every latent synthesized from one rolled print.
struct GroundTruth {
  GrayImage texture;               ///< scaled TV texture of the rolled print
  GrayImage enhanced;              ///< Gabor output before thinning
  SkeletonMap skeleton;            ///< g
  OrientationField orientation;    ///< g_F, dense FOMFE evaluation
  RealGrid weight_map;             ///< w
  MinutiaSet minutiae;             ///< extracted from g, rolled frame
  GrayImage gray;                  ///< 1 - rolled, ridges bright; the gray-gt ablation target
};

GroundTruth build_ground_truth(const GrayImage& rolled, const PairConfig& cfg);

struct LatentSample {
  GrayImage texture;     ///< l, scaled TV texture of the synthesized latent
  GrayImage latent;      ///< c before decomposition
  LatentDraw draw;
  MinutiaSet genuine;    ///< ground-truth minutiae mapped into the latent frame
};

/// Synthesizes one latent and maps the ground-truth minutiae through the
/// distortion; minutiae leaving the canvas are dropped.
LatentSample build_latent(const GrayImage& rolled, const GroundTruth& gt, const std::vector<GrayImage>& backgrounds,
                          RandomSource& rng, const PairConfig& cfg);

struct TrainingPair {
  GrayImage latent_texture;        ///< l
  SkeletonMap skeleton_gt;         ///< g
  OrientationField orientation_gt; ///< g_F
  RealGrid weight_map;             ///< w
};

TrainingPair build_training_pair(const GrayImage& rolled, const std::vector<GrayImage>& backgrounds, RandomSource& rng,
                                 const PairConfig& cfg = {});

/// One ground truth plus `latents_per_print` latents; latent i uses the
/// stream rng.derive(i).
struct PrintSamples {
  GroundTruth gt;
  std::vector<LatentSample> latents;
};

PrintSamples build_print_samples(const GrayImage& rolled, const std::vector<GrayImage>& backgrounds,
                                 const RandomSource& rng, const PairConfig& cfg = {});

}  // namespace fingergan::synthesis
