#pragma once

#include <cmath>
#include <numbers>

#include "fingergan/grid.hpp"

namespace fingergan {

/// Intensities live on a fixed-point lattice of step 2^-53 so that
/// differences of two intensities are exact in binary64.
inline double snap_intensity(double v) noexcept {
  constexpr double scale = 0x1.0p53;
  return std::nearbyint(v * scale) / scale;
}

/// Gray-level image with intensities in [0,1]. Ridges are dark (low values).
class GrayImage : public Grid<double> {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 1.0);

  /// Validates that every value is finite and inside [0,1].
  static GrayImage from_grid(RealGrid grid);
  /// Clamps every value into [0,1]; NaN becomes 1 (valley).
  static GrayImage clamped(RealGrid grid);

  const RealGrid& grid() const noexcept { return *this; }
  bool in_unit_range() const noexcept;

 private:
  explicit GrayImage(RealGrid grid) : Grid<double>(std::move(grid)) {}
};

/// Binary ridge map, ridge pixels = 1.
class SkeletonMap : public Grid<std::uint8_t> {
 public:
  SkeletonMap() = default;
  SkeletonMap(int width, int height) : Grid<std::uint8_t>(width, height, 0) {}

  static SkeletonMap from_grid(MaskGrid grid);
  /// Pixels strictly below `threshold` become ridge when `dark_is_ridge`.
  static SkeletonMap threshold(const RealGrid& values, double threshold, bool dark_is_ridge);

  std::size_t ridge_count() const noexcept;
  /// Ridge = 1.0, background = 0.0.
  RealGrid as_real() const;

 private:
  explicit SkeletonMap(MaskGrid grid) : Grid<std::uint8_t>(std::move(grid)) {}
};

/// Per-pixel ridge direction in [0,pi) measured from +x toward +y (image
/// coordinates, y pointing down). `strength` scales the doubled-angle
/// vector when the field is fitted; it is 1 unless the producer says
/// otherwise.
struct OrientationField {
  RealGrid angle;
  RealGrid strength;
  MaskGrid mask;

  OrientationField() = default;
  OrientationField(int width, int height, double fill_angle = 0.0, bool valid = true);

  int width() const noexcept { return angle.width(); }
  int height() const noexcept { return angle.height(); }
  bool valid(int x, int y) const noexcept { return mask(x, y) != 0; }
  std::size_t valid_count() const noexcept;

  /// angle/pi per pixel, the single-channel encoding fed to the discriminator.
  RealGrid encoded() const;
};

/// Maps any angle onto [0,pi).
inline double wrap_orientation(double theta) noexcept {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t = 0.0;
  return t;
}

/// Maps any angle onto [0,2pi).
inline double wrap_direction(double theta) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

/// Smallest absolute difference between two orientations (mod pi).
inline double orientation_difference(double a, double b) noexcept {
  double d = std::fabs(wrap_orientation(a) - wrap_orientation(b));
  return std::min(d, std::numbers::pi - d);
}

/// Smallest absolute difference between two directions (mod 2pi).
inline double direction_difference(double a, double b) noexcept {
  double d = std::fabs(wrap_direction(a) - wrap_direction(b));
  return std::min(d, 2.0 * std::numbers::pi - d);
}

}  // namespace fingergan
