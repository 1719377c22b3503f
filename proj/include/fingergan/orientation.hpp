#pragma once

#include <vector>

#include "fingergan/types.hpp"

namespace fingergan::orientation {

struct RawOrientationConfig {
  int block = 16;
  double min_coherence = 0.05;  ///< blocks below this are marked invalid
  double min_energy = 1e-8;     ///< mean squared gradient below this is invalid
};

struct RawOrientation {
  OrientationField field;  ///< block-constant; strength = coherence
  RealGrid coherence;      ///< per pixel, [0,1]
  int block = 16;
};

/// Block structure tensor with Sobel gradients. The gradient orientation is
/// 0.5*atan2(2 sum GxGy, sum(Gx^2 - Gy^2)); the ridge direction reported in
/// the field is perpendicular to it.
RawOrientation estimate_raw_orientation(const RealGrid& img, const RawOrientationConfig& cfg = {});
RawOrientation estimate_raw_orientation(const SkeletonMap& skel, const RawOrientationConfig& cfg = {});

struct DenseOrientationConfig {
  double sigma = 6.0;           ///< Gaussian window of the structure tensor, pixels
  double min_coherence = 0.05;
  double min_energy = 1e-6;     ///< smoothed squared gradient below this is invalid
  /// Also invalid below this fraction of the 90th-percentile energy.
  double min_relative_energy = 0.3;
};

/// Per-pixel structure tensor averaged with a Gaussian window; same angle
/// convention as the block estimate, strength = coherence.
OrientationField estimate_dense_orientation(const RealGrid& img, const DenseOrientationConfig& cfg = {});

/// Truncated bivariate Fourier model of the doubled-angle field:
/// c(x,y) = sum a_ij phi_i(x/W) phi_j(y/H), s likewise, with
/// phi = {1, cos(m pi t), sin(m pi t)}, m = 1..K, and angle = atan2(s,c)/2.
class FomfeModel {
 public:
  FomfeModel() = default;
  FomfeModel(int order, int width, int height, std::vector<double> coeffs_cos, std::vector<double> coeffs_sin);

  int order() const noexcept { return order_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  static int basis_size(int order) noexcept { return (2 * order + 1) * (2 * order + 1); }
  const std::vector<double>& coeffs_cos() const noexcept { return coeffs_cos_; }
  const std::vector<double>& coeffs_sin() const noexcept { return coeffs_sin_; }
  std::vector<double>& coeffs_cos() noexcept { return coeffs_cos_; }
  std::vector<double>& coeffs_sin() noexcept { return coeffs_sin_; }

  /// Fills `out` (size basis_size) with the basis functions at (x,y).
  void basis(double x, double y, std::vector<double>& out) const;
  /// Doubled-angle vector (c, s) at a point.
  std::pair<double, double> vector_at(double x, double y) const;
  double angle_at(double x, double y) const;

 private:
  int order_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> coeffs_cos_;
  std::vector<double> coeffs_sin_;
};

struct FitSample {
  double x = 0.0;
  double y = 0.0;
  double target_cos = 0.0;  ///< strength * cos(2 theta)
  double target_sin = 0.0;
};

struct FomfeFit {
  FomfeModel model;
  std::vector<FitSample> samples;
  std::vector<double> residual_cos;  ///< model minus target per sample
  std::vector<double> residual_sin;
  double residual_sum_squares = 0.0;
};

struct FomfeConfig {
  int order = 4;
  int sample_step = 16;       ///< sampling stride; samples sit at step/2 + i*step
  double ridge_damping = 1e-8;
};

/// Least-squares fit over the valid samples. Throws std::invalid_argument
/// when fewer than basis_size(order) samples are valid.
FomfeFit fit_fomfe(const OrientationField& field, const FomfeConfig& cfg = {});

/// Sum of squared doubled-angle residuals of `model` over `samples`.
double fit_residual(const FomfeModel& model, const std::vector<FitSample>& samples);

/// Dense evaluation. Every pixel is valid; strength holds |(c, s)|.
OrientationField evaluate_fomfe(const FomfeModel& model);

}  // namespace fingergan::orientation
