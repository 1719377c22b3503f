#include "fingergan/types.hpp"

#include <algorithm>

namespace fingergan {

GrayImage::GrayImage(int width, int height, double fill) : Grid<double>(width, height, fill) {
  if (width < 1 || height < 1) throw std::invalid_argument("gray image must be at least 1x1");
  if (!(fill >= 0.0 && fill <= 1.0)) throw std::invalid_argument("gray image fill outside [0,1]");
}

GrayImage GrayImage::from_grid(RealGrid grid) {
  if (grid.width() < 1 || grid.height() < 1) throw std::invalid_argument("gray image must be at least 1x1");
  for (double v : grid.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("gray image value outside [0,1]");
  }
  return GrayImage(std::move(grid));
}

GrayImage GrayImage::clamped(RealGrid grid) {
  if (grid.width() < 1 || grid.height() < 1) throw std::invalid_argument("gray image must be at least 1x1");
  for (double& v : grid.values()) {
    v = std::isnan(v) ? 1.0 : std::clamp(v, 0.0, 1.0);
  }
  return GrayImage(std::move(grid));
}

bool GrayImage::in_unit_range() const noexcept {
  return std::all_of(values().begin(), values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

SkeletonMap SkeletonMap::from_grid(MaskGrid grid) {
  for (auto v : grid.values()) {
    if (v > 1) throw std::invalid_argument("skeleton map values must be 0 or 1");
  }
  return SkeletonMap(std::move(grid));
}

SkeletonMap SkeletonMap::threshold(const RealGrid& values, double threshold, bool dark_is_ridge) {
  MaskGrid out(values.width(), values.height(), 0);
  for (int y = 0; y < values.height(); ++y) {
    for (int x = 0; x < values.width(); ++x) {
      const double v = values(x, y);
      out(x, y) = dark_is_ridge ? (v < threshold) : (v >= threshold);
    }
  }
  return SkeletonMap(std::move(out));
}

std::size_t SkeletonMap::ridge_count() const noexcept {
  return static_cast<std::size_t>(std::count(values().begin(), values().end(), std::uint8_t{1}));
}

RealGrid SkeletonMap::as_real() const {
  RealGrid out(width(), height(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) out.values()[i] = values()[i] ? 1.0 : 0.0;
  return out;
}

OrientationField::OrientationField(int width, int height, double fill_angle, bool valid)
    : angle(width, height, wrap_orientation(fill_angle)),
      strength(width, height, 1.0),
      mask(width, height, valid ? 1 : 0) {}

std::size_t OrientationField::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(mask.values().begin(), mask.values().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

RealGrid OrientationField::encoded() const {
  RealGrid out(width(), height(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = angle.values()[i] / std::numbers::pi;
  return out;
}

}  // namespace fingergan
