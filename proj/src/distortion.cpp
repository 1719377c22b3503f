#include "fingergan/distortion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fingergan::distortion {

void DistortionParams::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("distortion: plasticity k must be > 0");
  if (!(s_x > 0.0) || !(s_y > 0.0)) throw std::invalid_argument("distortion: ellipse semi-axes must be > 0");
}

void DistortionParamRanges::validate() const {
  if (!(k_min > 0.0 && k_min <= k_max)) throw std::invalid_argument("distortion ranges: need 0 < k_min <= k_max");
  if (!(theta_min_deg <= theta_max_deg)) throw std::invalid_argument("distortion ranges: empty theta interval");
  if (!(e_min <= e_max)) throw std::invalid_argument("distortion ranges: empty displacement interval");
  if (!(sx_min_frac > 0.0 && sx_min_frac <= sx_max_frac)) {
    throw std::invalid_argument("distortion ranges: need 0 < sx_min_frac <= sx_max_frac");
  }
  if (!(sy_max_ratio >= 1.0)) throw std::invalid_argument("distortion ranges: sy_max_ratio must be >= 1");
}

double ellipse_distance(Vec2 p, const DistortionParams& params) {
  // q - 1 = (a^2 + b^2 - c^2) / c^2 with a = dx s_y, b = dy s_x, c = s_x s_y;
  // one rounding in the numerator instead of cancellation after division,
  // since sqrt turns an ulp of q into ~1e-8 of h.
  const double a = (p.x - params.ellipse_center.x) * params.s_y;
  const double b = (p.y - params.ellipse_center.y) * params.s_x;
  const double c = params.s_x * params.s_y;
  const double q_minus_1 = std::fma(a, a, std::fma(b, b, -c * c)) / (c * c);
  return q_minus_1 >= 0.0 ? std::sqrt(q_minus_1) : -std::sqrt(-q_minus_1);
}

double gradual_transition(double h, double k) {
  if (h <= 0.0) return 0.0;
  if (h < k) return 0.5 * (1.0 - std::cos(std::numbers::pi * h / k));
  return 1.0;
}

Vec2 displacement(Vec2 p, const DistortionParams& params) {
  const double t = params.theta_deg * std::numbers::pi / 180.0;
  const double c_minus_1 = params.theta_deg == 0.0 ? 0.0 : std::cos(t) - 1.0;
  const double s = params.theta_deg == 0.0 ? 0.0 : std::sin(t);
  const double dx = p.x - params.rotation_center.x;
  const double dy = p.y - params.rotation_center.y;
  // (R - I)(p - o_r) + e, written so that theta = 0, e = 0 gives exact zeros.
  return {c_minus_1 * dx + s * dy + params.e.x, -s * dx + c_minus_1 * dy + params.e.y};
}

Vec2 forward_map(Vec2 p, const DistortionParams& params) {
  const Vec2 d = displacement(p, params);
  const double g = gradual_transition(ellipse_distance(p, params), params.k);
  return {p.x + d.x * g, p.y + d.y * g};
}

double bilinear_sample(const RealGrid& img, double x, double y, double outside) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  if (fx0 < -1.0 || fy0 < -1.0 || fx0 > img.width() || fy0 > img.height()) return outside;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const double v00 = img.get_or(x0, y0, outside);
  const double v10 = img.get_or(x0 + 1, y0, outside);
  const double v01 = img.get_or(x0, y0 + 1, outside);
  const double v11 = img.get_or(x0 + 1, y0 + 1, outside);
  return (v00 * (1.0 - ax) + v10 * ax) * (1.0 - ay) + (v01 * (1.0 - ax) + v11 * ax) * ay;
}

GrayImage distort_image(const GrayImage& img, const DistortionParams& params, int inverse_iterations,
                        double background) {
  params.validate();
  RealGrid out(img.width(), img.height(), background);
  for (int qy = 0; qy < img.height(); ++qy) {
    for (int qx = 0; qx < img.width(); ++qx) {
      const Vec2 q{static_cast<double>(qx), static_cast<double>(qy)};
      Vec2 p = q;
      for (int it = 0; it < inverse_iterations; ++it) {
        const Vec2 d = displacement(p, params);
        const double g = gradual_transition(ellipse_distance(p, params), params.k);
        p = {q.x - d.x * g, q.y - d.y * g};
      }
      out(qx, qy) = bilinear_sample(img, p.x, p.y, background);
    }
  }
  return GrayImage::clamped(std::move(out));
}

DistortionParams sample_distortion(const DistortionParamRanges& ranges, RandomSource& rng, int width, int height) {
  ranges.validate();
  DistortionParams p;
  const Vec2 center{(width - 1) / 2.0, (height - 1) / 2.0};
  const double s = width / 2.0;
  p.k = rng.uniform(ranges.k_min, ranges.k_max);
  p.theta_deg = rng.uniform(ranges.theta_min_deg, ranges.theta_max_deg);
  p.e = {rng.uniform(ranges.e_min, ranges.e_max), rng.uniform(ranges.e_min, ranges.e_max)};
  p.rotation_center = center;
  p.ellipse_center = center;
  p.s_x = rng.uniform(ranges.sx_min_frac * s, ranges.sx_max_frac * s);
  p.s_y = rng.uniform(p.s_x, ranges.sy_max_ratio * p.s_x);
  return p;
}

}  // namespace fingergan::distortion
