#include "fingergan/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fingergan::inference {

void InferenceConfig::validate() const {
  if (window < 1) throw std::invalid_argument("inference: window must be >= 1");
  if (step < 1 || step > window) throw std::invalid_argument("inference: step must lie in [1, window]");
  if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("inference: gaussian sigma must be > 0");
  if (batch < 1) throw std::invalid_argument("inference: batch must be >= 1");
}

AxisTiling tile_axis(int extent, int window, int step) {
  if (extent < 1) throw std::invalid_argument("inference: empty image");
  AxisTiling t;
  int origin = 0;
  t.origins.push_back(origin);
  while (origin + window < extent) {
    origin += step;
    t.origins.push_back(origin);
  }
  t.padded = origin + window;
  return t;
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

MaskGrid coverage(int width, int height, const InferenceConfig& cfg) {
  cfg.validate();
  const AxisTiling tx = tile_axis(width, cfg.window, cfg.step), ty = tile_axis(height, cfg.window, cfg.step);
  MaskGrid cov(width, height, 0);
  for (const int oy : ty.origins) {
    for (const int ox : tx.origins) {
      for (int y = oy; y < std::min(height, oy + cfg.window); ++y) {
        for (int x = ox; x < std::min(width, ox + cfg.window); ++x) ++cov(x, y);
      }
    }
  }
  return cov;
}

GrayImage enhance_full_image(const GrayImage& texture, PatchPredictor& predictor, const InferenceConfig& cfg) {
  cfg.validate();
  const int w = texture.width(), h = texture.height();
  const AxisTiling tx = tile_axis(w, cfg.window, cfg.step), ty = tile_axis(h, cfg.window, cfg.step);
  const int win = cfg.window;

  std::vector<double> weights(static_cast<std::size_t>(win) * win, 1.0);
  if (cfg.aggregation == Aggregation::gaussian) {
    const double s = cfg.gaussian_sigma * win, c = (win - 1) / 2.0;
    for (int y = 0; y < win; ++y) {
      for (int x = 0; x < win; ++x) {
        weights[static_cast<std::size_t>(y) * win + x] =
            std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / (2.0 * s * s));
      }
    }
  }

  std::vector<std::pair<int, int>> origins;
  for (const int oy : ty.origins) {
    for (const int ox : tx.origins) origins.emplace_back(ox, oy);
  }

  RealGrid mean(w, h, 0.0), total(w, h, 0.0);
  for (std::size_t start = 0; start < origins.size(); start += static_cast<std::size_t>(cfg.batch)) {
    const std::size_t end = std::min(origins.size(), start + static_cast<std::size_t>(cfg.batch));
    nn::Tensor patches(static_cast<int>(end - start), 1, win, win);
    for (std::size_t k = start; k < end; ++k) {
      const auto [ox, oy] = origins[k];
      const int slot = static_cast<int>(k - start);
      for (int y = 0; y < win; ++y) {
        const int sy = reflect_index(oy + y, h);
        for (int x = 0; x < win; ++x) patches.at(slot, 0, y, x) = static_cast<float>(texture(reflect_index(ox + x, w), sy));
      }
    }
    const nn::Tensor pred = predictor.predict(patches);
    if (!pred.same_shape(patches)) {
      throw std::runtime_error("inference: predictor returned " + pred.shape_string() + " for " + patches.shape_string());
    }
    for (std::size_t k = start; k < end; ++k) {
      const auto [ox, oy] = origins[k];
      const int slot = static_cast<int>(k - start);
      for (int y = 0; y < win && oy + y < h; ++y) {
        for (int x = 0; x < win && ox + x < w; ++x) {
          const double wt = weights[static_cast<std::size_t>(y) * win + x];
          double& t = total(ox + x, oy + y);
          double& m = mean(ox + x, oy + y);
          t += wt;
          m += wt / t * (static_cast<double>(pred.at(slot, 0, y, x)) - m);
        }
      }
    }
  }
  return GrayImage::clamped(std::move(mean));
}

SkeletonMap binarize_output(const GrayImage& enhanced) { return SkeletonMap::threshold(enhanced.grid(), 0.5, false); }

}  // namespace fingergan::inference
