#pragma once

#include <vector>

#include "fingergan/nn/network.hpp"
#include "fingergan/types.hpp"

namespace fingergan::inference {

enum class Aggregation { mean, gaussian };

struct InferenceConfig {
  int window = 192;
  int step = 8;
  Aggregation aggregation = Aggregation::mean;
  double gaussian_sigma = 0.25;  ///< gaussian weights: sigma as a fraction of the window
  int batch = 8;                 ///< windows per predictor call

  void validate() const;
};

/// Maps an n x 1 x window x window batch to predictions of the same shape.
class PatchPredictor {
 public:
  virtual ~PatchPredictor() = default;
  virtual nn::Tensor predict(const nn::Tensor& patches) = 0;
};

/// Evaluation-mode generator.
class GeneratorPredictor : public PatchPredictor {
 public:
  explicit GeneratorPredictor(nn::Generator& gen) : gen_(gen) {}
  nn::Tensor predict(const nn::Tensor& patches) override { return gen_.forward(patches, false); }

 private:
  nn::Generator& gen_;
};

/// Window origins along one axis of length `extent`: 0, step, ... up to the
/// first origin whose window reaches the end. The padded extent is the end
/// of the last window.
struct AxisTiling {
  std::vector<int> origins;
  int padded = 0;
};
AxisTiling tile_axis(int extent, int window, int step);

/// Reflection without edge repetition, valid for any index (repeated folding).
int reflect_index(int i, int n) noexcept;

/// Per-pixel number of windows covering each pixel of the original extent.
MaskGrid coverage(int width, int height, const InferenceConfig& cfg);

/// Reflect-pads `texture` to the tiling grid, predicts every window and
/// aggregates overlapping predictions by a running (weighted) mean, so
/// pixels where all predictions agree get exactly that value. Output is
/// cropped back to the input size and clamped to [0,1].
GrayImage enhance_full_image(const GrayImage& texture, PatchPredictor& predictor, const InferenceConfig& cfg = {});

/// Ridge where the enhanced value is at least 0.5.
SkeletonMap binarize_output(const GrayImage& enhanced);

}  // namespace fingergan::inference
