#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingergan/minutia.hpp"
#include "fingergan/procedural.hpp"
#include "fingergan/synthesis.hpp"
#include "fingergan/types.hpp"

namespace fingergan::dataset {

/// One training example; every grid has the same dimensions.
struct Example {
  std::string id;
  RealGrid latent;       ///< l, scaled texture in [0,1]
  RealGrid skeleton;     ///< g, ridge = 1
  RealGrid gray;         ///< gray-gt ablation target, ridges bright
  RealGrid orientation;  ///< g_F encoded as angle/pi
  RealGrid weight;       ///< w
  MinutiaSet genuine;    ///< ground-truth minutiae in the latent frame
  synthesis::LatentDraw draw;
};

struct Dataset {
  std::vector<Example> examples;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
};

/// Quantizes the images to 8 bits and the real grids to float32, so an
/// example equals its own write/read round trip.
Example make_example(std::string id, const synthesis::GroundTruth& gt, const synthesis::LatentSample& latent);

struct SynthConfig {
  int prints = 10;
  std::uint64_t seed = 0;
  procedural::PrintConfig print;
  synthesis::PairConfig pair;
  synthesis::QualityConfig quality;
  int backgrounds = 8;
  int background_margin = 32;  ///< backgrounds exceed the print by this many pixels per axis
  int max_attempts_per_print = 20;

  void validate() const;
};

/// Procedural prints pass the quality filter before use; print i draws from
/// seed-derived stream i (retrying on its own sub-streams), so datasets are
/// reproducible and prefix-stable in `prints`.
Dataset synthesize(const SynthConfig& cfg);

/// Directory layout:
///   latents/<id>.png     l
///   skeletons/<p>.png    g, shared by the latents of print p
///   grays/<p>.png        gray-gt target
///   orients/<p>.grid     g_F angle in radians (binary grid format)
///   weights/<p>.grid     w (binary grid format)
///   minutiae/<id>.txt    genuine minutiae in the latent frame
///   manifest.tsv         one row per latent, plus the texture scaling
void write_dataset(const Dataset& data, const std::filesystem::path& dir, const SynthConfig& cfg);
Dataset read_dataset(const std::filesystem::path& dir);

/// Name of the ground-truth group of an example id ("p0003-l07" -> "p0003").
std::string print_id(const std::string& example_id);

}  // namespace fingergan::dataset
