#include "fingergan/weightmap.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fingergan::weightmap {
namespace {

// The kernel factorizes: w_g(u,v) = a(u) a(v) with a(t) = exp(-t^2/2s^2)/sqrt(2 pi s^2).
std::vector<double> kernel_1d(const WeightMapParams& p) {
  std::vector<double> k(static_cast<std::size_t>(2 * p.r + 1));
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * p.sigma * p.sigma);
  for (int t = -p.r; t <= p.r; ++t) k[static_cast<std::size_t>(t + p.r)] = norm * std::exp(-(t * t) / (2.0 * p.sigma * p.sigma));
  return k;
}

}  // namespace

void WeightMapParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("weightmap: sigma must be > 0");
  if (r < 1) throw std::invalid_argument("weightmap: r must be >= 1");
}

RealGrid gaussian_kernel(const WeightMapParams& params) {
  params.validate();
  const int n = 2 * params.r + 1;
  RealGrid k(n, n);
  const double s2 = params.sigma * params.sigma;
  for (int v = -params.r; v <= params.r; ++v) {
    for (int u = -params.r; u <= params.r; ++u) {
      k(u + params.r, v + params.r) = std::exp(-(u * u + v * v) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
    }
  }
  return k;
}

double kernel_sum(const WeightMapParams& params) {
  const RealGrid k = gaussian_kernel(params);
  double s = 0.0;
  for (double v : k.values()) s += v;
  return s;
}

double floor_value(const WeightMapParams& params) {
  const RealGrid k = gaussian_kernel(params);
  double s = 0.0;
  for (double v : k.values()) s += v;
  return k(2 * params.r, 2 * params.r) / s;
}

RealGrid correlate(const MaskGrid& map, const WeightMapParams& params) {
  params.validate();
  const int w = map.width(), h = map.height(), r = params.r;
  const std::vector<double> k = kernel_1d(params);
  double k_total = 0.0;
  for (double a : k) k_total += a;
  const double denom = k_total * k_total;

  RealGrid rows(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!map(x, y)) continue;
      for (int u = std::max(-r, -x); u <= std::min(r, w - 1 - x); ++u) rows(x + u, y) += k[static_cast<std::size_t>(u + r)];
    }
  }
  RealGrid out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int v = std::max(-r, -y); v <= std::min(r, h - 1 - y); ++v) acc += k[static_cast<std::size_t>(v + r)] * rows(x, y + v);
      out(x, y) = acc / denom;
    }
  }
  return out;
}

RealGrid build_weight_map(const MaskGrid& map, const WeightMapParams& params) {
  RealGrid w = correlate(map, params);
  const double w0 = floor_value(params);
  for (double& v : w.values()) {
    if (v == 0.0) v = w0;
  }
  return w;
}

}  // namespace fingergan::weightmap
