#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fingergan/distortion.hpp"
#include "fingergan/skeleton.hpp"

namespace fingergan::skeleton {
namespace {

constexpr double kMinPeriod = 3.0;
constexpr double kMaxPeriod = 25.0;

struct Kernel {
  int radius = 0;
  std::vector<double> taps;  // (2r+1)^2, row-major over (v, u)
};

Kernel make_kernel(double ridge_angle, double frequency, const GaborConfig& cfg) {
  const int r = cfg.kernel_radius;
  const int n = 2 * r + 1;
  const double normal = ridge_angle + std::numbers::pi / 2.0;
  const double cn = std::cos(normal), sn = std::sin(normal);
  std::vector<double> env(static_cast<std::size_t>(n * n)), wave(env.size());
  double env_sum = 0.0, env_wave = 0.0;
  for (int v = -r; v <= r; ++v) {
    for (int u = -r; u <= r; ++u) {
      const double across = u * cn + v * sn;
      const double along = -u * sn + v * cn;
      const std::size_t i = static_cast<std::size_t>((v + r) * n + (u + r));
      env[i] = std::exp(-0.5 * (across * across / (cfg.sigma_x * cfg.sigma_x) + along * along / (cfg.sigma_y * cfg.sigma_y)));
      wave[i] = std::cos(2.0 * std::numbers::pi * frequency * across);
      env_sum += env[i];
      env_wave += env[i] * wave[i];
    }
  }
  const double dc = env_wave / env_sum;
  Kernel k{r, std::vector<double>(env.size())};
  for (std::size_t i = 0; i < env.size(); ++i) k.taps[i] = env[i] * (wave[i] - dc);
  return k;
}

int orientation_bin(double angle, int bins) {
  const double step = std::numbers::pi / bins;
  return static_cast<int>(std::lround(wrap_orientation(angle) / step)) % bins;
}

double block_period(const GrayImage& img, double cx, double cy, double ridge_angle, int block) {
  const int len = 2 * block, wid = block;
  const double normal = ridge_angle + std::numbers::pi / 2.0;
  const double nx = std::cos(normal), ny = std::sin(normal);
  const double rx = std::cos(ridge_angle), ry = std::sin(ridge_angle);
  std::vector<double> sig(static_cast<std::size_t>(len), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < len; ++k) {
    double acc = 0.0;
    int cnt = 0;
    for (int d = 0; d < wid; ++d) {
      const double a = k - len / 2.0 + 0.5, b = d - wid / 2.0 + 0.5;
      const double x = cx + a * nx + b * rx, y = cy + a * ny + b * ry;
      const double v = distortion::bilinear_sample(img, x, y, std::numeric_limits<double>::quiet_NaN());
      if (std::isfinite(v)) {
        acc += v;
        ++cnt;
      }
    }
    if (cnt > 0) sig[static_cast<std::size_t>(k)] = acc / cnt;
  }
  std::vector<double> sm(sig.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 1; k + 1 < sig.size(); ++k) sm[k] = (sig[k - 1] + 2.0 * sig[k] + sig[k + 1]) / 4.0;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : sm) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi - lo > 1e-3)) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> minima;
  for (std::size_t k = 2; k + 2 < sm.size(); ++k) {
    if (!std::isfinite(sm[k - 1]) || !std::isfinite(sm[k]) || !std::isfinite(sm[k + 1])) continue;
    if (sm[k] < sm[k - 1] && sm[k] <= sm[k + 1] && sm[k] < lo + 0.5 * (hi - lo)) minima.push_back(k);
  }
  if (minima.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(minima.back() - minima.front()) / static_cast<double>(minima.size() - 1);
}

}  // namespace

void GaborConfig::validate() const {
  if (block_size < 8) throw std::invalid_argument("gabor: block_size must be >= 8");
  if (kernel_radius < 1) throw std::invalid_argument("gabor: kernel_radius must be >= 1");
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw std::invalid_argument("gabor: sigmas must be > 0");
  if (!(fixed_frequency > 0.0 && fixed_frequency < 0.5)) throw std::invalid_argument("gabor: fixed_frequency must lie in (0, 0.5)");
  if (orientation_bins < 4) throw std::invalid_argument("gabor: orientation_bins must be >= 4");
}

RealGrid estimate_frequency(const GrayImage& img, const OrientationField& orient, const GaborConfig& cfg) {
  cfg.validate();
  require_same_dims(img, orient.angle, "estimate_frequency");
  RealGrid freq(img.width(), img.height(), cfg.fixed_frequency);
  if (cfg.frequency_mode == FrequencyMode::fixed) return freq;
  const int b = cfg.block_size;
  for (int by = 0; by < img.height(); by += b) {
    for (int bx = 0; bx < img.width(); bx += b) {
      const int ex = std::min(bx + b, img.width()), ey = std::min(by + b, img.height());
      const int cx = (bx + ex - 1) / 2, cy = (by + ey - 1) / 2;
      if (!orient.valid(cx, cy)) continue;
      const double period = block_period(img, cx, cy, orient.angle(cx, cy), b);
      if (!(period >= kMinPeriod && period <= kMaxPeriod)) continue;
      for (int y = by; y < ey; ++y) {
        for (int x = bx; x < ex; ++x) freq(x, y) = 1.0 / period;
      }
    }
  }
  return freq;
}

GrayImage enhance_gabor(const GrayImage& img, const OrientationField& orient, const GaborConfig& cfg) {
  cfg.validate();
  require_same_dims(img, orient.angle, "enhance_gabor");
  const int w = img.width(), h = img.height(), r = cfg.kernel_radius, n = 2 * r + 1;
  const RealGrid freq = estimate_frequency(img, orient, cfg);

  // Periods are quantized to quarter pixels so kernels can be shared.
  std::map<std::pair<int, int>, Kernel> cache;
  RealGrid resp(w, h, 0.0);
  double abs_sum = 0.0;
  std::size_t valid = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!orient.valid(x, y)) continue;
      const int ob = orientation_bin(orient.angle(x, y), cfg.orientation_bins);
      const int pq = static_cast<int>(std::lround(4.0 / freq(x, y)));
      auto it = cache.find({ob, pq});
      if (it == cache.end()) {
        const double angle = ob * std::numbers::pi / cfg.orientation_bins;
        it = cache.emplace(std::make_pair(ob, pq), make_kernel(angle, 4.0 / pq, cfg)).first;
      }
      const auto& taps = it->second.taps;
      double acc = 0.0;
      for (int v = -r; v <= r; ++v) {
        const int yy = std::clamp(y + v, 0, h - 1);
        const double* row = img.data() + static_cast<std::size_t>(yy) * w;
        const double* k = taps.data() + static_cast<std::size_t>((v + r) * n + r);
        for (int u = -r; u <= r; ++u) acc += k[u] * row[std::clamp(x + u, 0, w - 1)];
      }
      resp(x, y) = acc;
      abs_sum += std::fabs(acc);
      ++valid;
    }
  }
  const double scale = std::max(valid ? 2.0 * abs_sum / valid : 0.0, 1e-6);
  RealGrid out(w, h, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (orient.valid(x, y)) out(x, y) = 0.5 + resp(x, y) / (2.0 * scale);
    }
  }
  return GrayImage::clamped(std::move(out));
}

}  // namespace fingergan::skeleton
