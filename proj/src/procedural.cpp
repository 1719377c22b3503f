#include "fingergan/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fingergan::procedural {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Bilinearly interpolated random lattice with `cell` pixel spacing.
RealGrid value_noise(int width, int height, int cell, RandomSource& rng) {
  const int gw = width / cell + 2, gh = height / cell + 2;
  RealGrid lattice(gw, gh);
  for (double& v : lattice.values()) v = rng.uniform01();
  RealGrid out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / cell, fy = static_cast<double>(y) / cell;
      const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
      double tx = fx - ix, ty = fy - iy;
      tx = tx * tx * (3.0 - 2.0 * tx);
      ty = ty * ty * (3.0 - 2.0 * ty);
      const double a = lattice(ix, iy) * (1 - tx) + lattice(ix + 1, iy) * tx;
      const double b = lattice(ix, iy + 1) * (1 - tx) + lattice(ix + 1, iy + 1) * tx;
      out(x, y) = a * (1 - ty) + b * ty;
    }
  }
  return out;
}

}  // namespace

void PrintConfig::validate() const {
  if (width < 16 || height < 16) throw std::invalid_argument("procedural: print must be at least 16x16");
  if (!(period_min >= 3.0 && period_min <= period_max)) throw std::invalid_argument("procedural: need 3 <= period_min <= period_max");
  if (dislocations_min < 0 || dislocations_min > dislocations_max) {
    throw std::invalid_argument("procedural: need 0 <= dislocations_min <= dislocations_max");
  }
  if (!(contrast > 0.0 && contrast <= 0.5)) throw std::invalid_argument("procedural: contrast must lie in (0, 0.5]");
}

GrayImage generate_print(const PrintConfig& cfg, RandomSource& rng) {
  cfg.validate();
  const int w = cfg.width, h = cfg.height;
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double freq = kTwoPi / rng.uniform(cfg.period_min, cfg.period_max);
  const double alpha = rng.uniform(0.0, std::numbers::pi);
  const double ca = std::cos(alpha), sa = std::sin(alpha);

  struct Warp {
    double kx, ky, phase, amp;
  };
  std::vector<Warp> warps;
  for (int i = 0; i < 2; ++i) {
    const double wl = rng.uniform(0.8, 1.6) * std::max(w, h);
    const double dir = rng.uniform(0.0, kTwoPi);
    warps.push_back({kTwoPi / wl * std::cos(dir), kTwoPi / wl * std::sin(dir), rng.uniform(0.0, kTwoPi),
                     cfg.warp_amplitude * rng.uniform(0.5, 1.0)});
  }
  struct Dislocation {
    double x, y, charge;
  };
  std::vector<Dislocation> dis;
  const auto n = rng.uniform_int(cfg.dislocations_min, cfg.dislocations_max);
  for (std::int64_t i = 0; i < n; ++i) {
    dis.push_back({rng.uniform(0.2 * w, 0.8 * w), rng.uniform(0.2 * h, 0.8 * h), rng.uniform01() < 0.5 ? -1.0 : 1.0});
  }
  const double rx = rng.uniform(0.38, 0.46) * w, ry = rng.uniform(0.42, 0.48) * h;

  RealGrid out(w, h, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double phi = freq * ((x - cx) * ca + (y - cy) * sa);
      for (const auto& wp : warps) phi += wp.amp * std::sin(wp.kx * x + wp.ky * y + wp.phase);
      for (const auto& d : dis) phi += d.charge * std::atan2(y - d.y, x - d.x);
      const double q = std::hypot((x - cx) / rx, (y - cy) / ry);
      const double fg = std::clamp((1.08 - q) / 0.08, 0.0, 1.0);
      out(x, y) = 1.0 - fg + fg * (0.5 + cfg.contrast * std::cos(phi));
    }
  }
  return GrayImage::clamped(std::move(out));
}

GrayImage generate_background(int width, int height, RandomSource& rng) {
  if (width < 1 || height < 1) throw std::invalid_argument("procedural: background must be at least 1x1");
  RealGrid acc(width, height, 0.0);
  const int cells[] = {48, 16, 6};
  const double weights[] = {0.55, 0.3, 0.15};
  for (int i = 0; i < 3; ++i) {
    const RealGrid n = value_noise(width, height, cells[i], rng);
    for (std::size_t k = 0; k < acc.size(); ++k) acc.values()[k] += weights[i] * n.values()[k];
  }
  for (double& v : acc.values()) v = 0.45 + 0.55 * v;

  const auto strokes = rng.uniform_int(3, 9);
  for (std::int64_t s = 0; s < strokes; ++s) {
    const double x0 = rng.uniform(0.0, width), y0 = rng.uniform(0.0, height);
    const double dir = rng.uniform(0.0, kTwoPi), len = rng.uniform(0.3, 1.0) * std::max(width, height);
    const double half = rng.uniform(0.5, 2.5), dark = rng.uniform(0.1, 0.45);
    const int steps = static_cast<int>(len * 2.0);
    for (int t = 0; t <= steps; ++t) {
      const double px = x0 + std::cos(dir) * t * 0.5, py = y0 + std::sin(dir) * t * 0.5;
      const int r = static_cast<int>(std::ceil(half));
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int xi = static_cast<int>(std::lround(px)) + dx, yi = static_cast<int>(std::lround(py)) + dy;
          if (!acc.contains(xi, yi) || std::hypot(xi - px, yi - py) > half) continue;
          acc(xi, yi) = std::min(acc(xi, yi), 1.0 - dark);
        }
      }
    }
  }
  for (double& v : acc.values()) v = std::clamp(v, 0.25, 1.0);
  return GrayImage::clamped(std::move(acc));
}

}  // namespace fingergan::procedural
