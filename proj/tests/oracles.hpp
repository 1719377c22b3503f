// Reference implementations used only by tests. Each one is written from
// the defining formula with plain loops and shares no code with the library
// routine it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "fingergan/grid.hpp"
#include "fingergan/minutia.hpp"
#include "fingergan/nn/tensor.hpp"

namespace oracle {

constexpr double kPi = std::numbers::pi;

/// Unnormalized Gaussian kernel value exp(-(u^2+v^2)/(2 s^2)) / (2 pi s^2).
inline double gaussian(int u, int v, double sigma) {
  return std::exp(-(u * u + v * v) / (2.0 * sigma * sigma)) / (2.0 * kPi * sigma * sigma);
}

/// Weight map by direct summation: w'(p) = sum_{|u|,|v|<=r} M(p+(u,v)) w_g(u,v) / sum w_g,
/// then w = w' where nonzero, else w_g(r,r) / sum w_g.
inline fingergan::RealGrid weight_map(const fingergan::MaskGrid& m, double sigma, int r) {
  double total = 0.0;
  for (int v = -r; v <= r; ++v) {
    for (int u = -r; u <= r; ++u) total += gaussian(u, v, sigma);
  }
  const double floor = gaussian(r, r, sigma) / total;
  fingergan::RealGrid out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      double acc = 0.0;
      for (int v = -r; v <= r; ++v) {
        for (int u = -r; u <= r; ++u) {
          const int xx = x + u, yy = y + v;
          if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height() && m(xx, yy) != 0) acc += gaussian(u, v, sigma);
        }
      }
      out(x, y) = acc != 0.0 ? acc / total : floor;
    }
  }
  return out;
}

/// Isotropic TV with forward differences (zero beyond the last row/column)
/// plus lambda/2 |u - f|^2.
inline double rof_objective(const fingergan::RealGrid& u, const fingergan::RealGrid& f, double lambda) {
  double tv = 0.0, fid = 0.0;
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      const double dx = x + 1 < u.width() ? u(x + 1, y) - u(x, y) : 0.0;
      const double dy = y + 1 < u.height() ? u(x, y + 1) - u(x, y) : 0.0;
      tv += std::sqrt(dx * dx + dy * dy);
      fid += (u(x, y) - f(x, y)) * (u(x, y) - f(x, y));
    }
  }
  return tv + 0.5 * lambda * fid;
}

inline double direction_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

/// Maximum number of one-to-one pairs between extracted and genuine
/// minutiae under the tolerances, by exhaustive augmenting-path search.
inline std::size_t max_assignment(const std::vector<fingergan::Minutia>& e, const std::vector<fingergan::Minutia>& g,
                                  double radius, double angle_tol, bool require_type) {
  auto ok = [&](std::size_t i, std::size_t j) {
    const double d = std::hypot(e[i].x - g[j].x, e[i].y - g[j].y);
    return d <= radius && direction_gap(e[i].angle, g[j].angle) <= angle_tol && (!require_type || e[i].kind == g[j].kind);
  };
  std::vector<int> owner(g.size(), -1);
  std::function<bool(std::size_t, std::vector<char>&)> augment = [&](std::size_t i, std::vector<char>& seen) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!ok(i, j) || seen[j]) continue;
      seen[j] = 1;
      if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), seen)) {
        owner[j] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  std::size_t count = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    std::vector<char> seen(g.size(), 0);
    count += augment(i, seen);
  }
  return count;
}

/// 1-based rank of `mate` when row entries are sorted by descending score,
/// ties broken by ascending index.
inline std::size_t rank_of(const std::vector<double>& row, std::size_t mate) {
  std::vector<std::size_t> order(row.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), mate) - order.begin()) + 1;
}

/// Direct cross-correlation, NCHW input, weight [out][in][k][k].
inline fingergan::nn::Tensor conv2d(const fingergan::nn::Tensor& x, const std::vector<float>& w,
                                    const std::vector<float>& b, int out, int k, int stride, int pad) {
  const int ho = (x.h + 2 * pad - k) / stride + 1, wo = (x.w + 2 * pad - k) / stride + 1;
  fingergan::nn::Tensor y(x.n, out, ho, wo);
  for (int n = 0; n < x.n; ++n) {
    for (int o = 0; o < out; ++o) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          double acc = b[static_cast<std::size_t>(o)];
          for (int c = 0; c < x.c; ++c) {
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                if (iy < 0 || ix < 0 || iy >= x.h || ix >= x.w) continue;
                acc += static_cast<double>(w[static_cast<std::size_t>(((o * x.c + c) * k + ky) * k + kx)]) *
                       x.at(n, c, iy, ix);
              }
            }
          }
          y.at(n, o, oy, ox) = static_cast<float>(acc);
        }
      }
    }
  }
  return y;
}

/// Direct transposed convolution (scatter form), weight [in][out][k][k].
inline fingergan::nn::Tensor conv_transpose2d(const fingergan::nn::Tensor& x, const std::vector<float>& w,
                                              const std::vector<float>& b, int out, int k, int stride, int pad) {
  const int ho = (x.h - 1) * stride - 2 * pad + k, wo = (x.w - 1) * stride - 2 * pad + k;
  std::vector<double> acc(static_cast<std::size_t>(x.n) * out * ho * wo, 0.0);
  auto idx = [&](int n, int o, int y, int xx) { return ((static_cast<std::size_t>(n) * out + o) * ho + y) * wo + xx; };
  for (int n = 0; n < x.n; ++n) {
    for (int c = 0; c < x.c; ++c) {
      for (int iy = 0; iy < x.h; ++iy) {
        for (int ix = 0; ix < x.w; ++ix) {
          for (int o = 0; o < out; ++o) {
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const int oy = iy * stride - pad + ky, ox = ix * stride - pad + kx;
                if (oy < 0 || ox < 0 || oy >= ho || ox >= wo) continue;
                acc[idx(n, o, oy, ox)] += static_cast<double>(w[static_cast<std::size_t>(((c * out + o) * k + ky) * k + kx)]) *
                                          x.at(n, c, iy, ix);
              }
            }
          }
        }
      }
    }
  }
  fingergan::nn::Tensor y(x.n, out, ho, wo);
  for (int n = 0; n < x.n; ++n) {
    for (int o = 0; o < out; ++o) {
      for (int yy = 0; yy < ho; ++yy) {
        for (int xx = 0; xx < wo; ++xx) y.at(n, o, yy, xx) = static_cast<float>(acc[idx(n, o, yy, xx)] + b[static_cast<std::size_t>(o)]);
      }
    }
  }
  return y;
}

/// Parameter total of the generator and discriminator summed block by block
/// from the architecture table; b is the C1 width.
inline std::size_t conv_count(std::size_t k, std::size_t in, std::size_t out) { return k * k * in * out + out; }
inline std::size_t bn_count(std::size_t c) { return 2 * c; }

inline std::size_t generator_parameters(std::size_t b) {
  std::size_t n = 0;
  // C1: two 3x3 convolutions at width b.
  n += conv_count(3, 1, b) + bn_count(b) + conv_count(3, b, b) + bn_count(b);
  // C2..C4: 2x2 stride-2 down-sampling then 3x3, widths 2b, 4b, 8b.
  for (std::size_t w : {2 * b, 4 * b, 8 * b}) n += conv_count(2, w / 2, w) + bn_count(w) + conv_count(3, w, w) + bn_count(w);
  // C5: 2x2 stride-2 to 16b.
  n += conv_count(2, 8 * b, 16 * b) + bn_count(16 * b);
  // DC1..DC4: 2x2 up-conv to width w, skip concat doubles it, 3x3 up-conv back to w.
  for (std::size_t w : {8 * b, 4 * b, 2 * b, b}) n += conv_count(2, 2 * w, w) + bn_count(w) + conv_count(3, 2 * w, w) + bn_count(w);
  // DC5: 3x3 up-conv to one channel.
  n += conv_count(3, b, 1) + bn_count(1);
  return n;
}

inline std::size_t discriminator_parameters(std::size_t b) {
  const std::size_t ch[] = {2, b, b, 2 * b, 2 * b, 4 * b, 4 * b};
  std::size_t n = 0;
  for (int i = 0; i < 6; ++i) n += conv_count(4, ch[i], ch[i + 1]) + bn_count(ch[i + 1]);
  return n + conv_count(3, 4 * b, 1) + bn_count(1);
}

}  // namespace oracle
