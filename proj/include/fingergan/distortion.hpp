#pragma once

#include "fingergan/random.hpp"
#include "fingergan/types.hpp"

namespace fingergan::distortion {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Plastic skin distortion: rigid torsion/traction about `rotation_center`
/// blended in by a raised-cosine transition outside an ellipse.
struct DistortionParams {
  double k = 1.0;            ///< skin plasticity coefficient, > 0
  double theta_deg = 0.0;    ///< rotation angle in degrees
  Vec2 e;                    ///< traction displacement, pixels
  Vec2 rotation_center;      ///< o_r
  Vec2 ellipse_center;       ///< o_e
  double s_x = 1.0;          ///< ellipse semi-axes, pixels, > 0
  double s_y = 1.0;

  void validate() const;
};

/// Sampling intervals. s_x is drawn from [sx_min_frac*s, sx_max_frac*s] with
/// s half the image width; s_y from [s_x, sy_max_ratio*s_x].
struct DistortionParamRanges {
  double k_min = 0.5, k_max = 2.0;
  double theta_min_deg = 0.0, theta_max_deg = 5.0;
  double e_min = -15.0, e_max = 15.0;
  double sx_min_frac = 0.2, sx_max_frac = 0.6;
  double sy_max_ratio = 2.0;

  void validate() const;
};

/// Signed distance-like measure to the ellipse border: sqrt(q-1) outside
/// (q = (p-o_e)^T A^-1 (p-o_e)), -sqrt(1-q) inside.
double ellipse_distance(Vec2 p, const DistortionParams& params);

/// 0 for h <= 0, (1-cos(pi h/k))/2 for 0 < h < k, 1 otherwise.
double gradual_transition(double h, double k);

/// Torsion/traction amount (R_theta (p-o_r) + o_r + e) - p, with
/// R_theta = [[cos, sin], [-sin, cos]].
Vec2 displacement(Vec2 p, const DistortionParams& params);

/// p + displacement(p) * gradual_transition(ellipse_distance(p), k).
Vec2 forward_map(Vec2 p, const DistortionParams& params);

/// Renders the distorted image by inverse mapping: each output pixel q is
/// traced back with `inverse_iterations` fixed-point steps and the source is
/// sampled bilinearly; samples off the canvas read `background`.
GrayImage distort_image(const GrayImage& img, const DistortionParams& params, int inverse_iterations = 5,
                        double background = 1.0);

/// Bilinear sample at a real coordinate; neighbours outside read `outside`.
double bilinear_sample(const RealGrid& img, double x, double y, double outside);

/// Uniform draw per parameter; both centres at the image centre.
DistortionParams sample_distortion(const DistortionParamRanges& ranges, RandomSource& rng, int width, int height);

}  // namespace fingergan::distortion
