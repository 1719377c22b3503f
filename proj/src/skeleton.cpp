#include "fingergan/skeleton.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fingergan::skeleton {
namespace {

// Clockwise from north in y-down coordinates: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDx = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kDy = {-1, -1, 0, 1, 1, 1, 0, -1};

struct Point {
  int x = 0;
  int y = 0;
};

std::array<int, 8> neighbours(const SkeletonMap& s, int x, int y) {
  std::array<int, 8> p{};
  for (int i = 0; i < 8; ++i) p[i] = s.get_or(x + kDx[i], y + kDy[i], 0) ? 1 : 0;
  return p;
}

int transitions(const std::array<int, 8>& p) {
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1) ? 1 : 0;
  return a;
}

int count(const std::array<int, 8>& p) {
  int b = 0;
  for (int v : p) b += v;
  return b;
}

// Yokoi connectivity number for 8-connected foreground; 1 means the pixel is
// simple (deleting it keeps the topology).
int yokoi8(const std::array<int, 8>& p) {
  // Re-index counter-clockwise from east: x1=E, x2=NE, x3=N, x4=NW, x5=W, x6=SW, x7=S, x8=SE.
  const std::array<int, 8> x = {p[2], p[1], p[0], p[7], p[6], p[5], p[4], p[3]};
  int n = 0;
  for (int k = 0; k < 8; k += 2) {
    const int a = 1 - x[k], b = 1 - x[(k + 1) % 8], c = 1 - x[(k + 2) % 8];
    n += a - a * b * c;
  }
  return n;
}

bool zhang_suen_pass(SkeletonMap& s, int phase) {
  std::vector<Point> del;
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      if (!s(x, y)) continue;
      const auto p = neighbours(s, x, y);
      const int b = count(p);
      if (b < 2 || b > 6 || transitions(p) != 1) continue;
      // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
      const bool c1 = phase == 0 ? (p[0] * p[2] * p[4] == 0) : (p[0] * p[2] * p[6] == 0);
      const bool c2 = phase == 0 ? (p[2] * p[4] * p[6] == 0) : (p[0] * p[4] * p[6] == 0);
      if (c1 && c2) del.push_back({x, y});
    }
  }
  for (const auto& q : del) s(q.x, q.y) = 0;
  return !del.empty();
}

void remove_staircases(SkeletonMap& s) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) {
        if (!s(x, y)) continue;
        const auto p = neighbours(s, x, y);
        if (count(p) < 2) continue;
        const bool corner = (p[0] && p[2]) || (p[2] && p[4]) || (p[4] && p[6]) || (p[6] && p[0]);
        if (corner && yokoi8(p) == 1) {
          s(x, y) = 0;
          changed = true;
        }
      }
    }
  }
}

std::vector<Point> ridge_neighbours(const SkeletonMap& s, Point c) {
  std::vector<Point> out;
  for (int i = 0; i < 8; ++i) {
    const int x = c.x + kDx[i], y = c.y + kDy[i];
    if (s.get_or(x, y, 0)) out.push_back({x, y});
  }
  return out;
}

enum class TraceEnd { junction, terminal, length };

struct Trace {
  std::vector<Point> path;  // starting pixel first; excludes a reached junction
  TraceEnd end = TraceEnd::length;
};

// Follows the ridge from `start`, never re-entering `visited` pixels, until
// `max_len` pixels are collected, a junction is reached or the ridge ends.
Trace follow(const SkeletonMap& s, Point start, std::vector<Point> visited, int max_len) {
  Trace t;
  Point cur = start;
  auto seen = [&](Point q) {
    return std::any_of(visited.begin(), visited.end(), [&](Point v) { return v.x == q.x && v.y == q.y; });
  };
  while (true) {
    if (!t.path.empty() && crossing_number(s, cur.x, cur.y) >= 3) {
      t.end = TraceEnd::junction;
      return t;
    }
    t.path.push_back(cur);
    visited.push_back(cur);
    if (static_cast<int>(t.path.size()) >= max_len) {
      t.end = TraceEnd::length;
      return t;
    }
    std::vector<Point> next;
    for (const auto& q : ridge_neighbours(s, cur)) {
      if (!seen(q)) next.push_back(q);
    }
    if (next.empty()) {
      t.end = TraceEnd::terminal;
      return t;
    }
    if (next.size() > 1) {
      t.end = TraceEnd::junction;
      return t;
    }
    cur = next.front();
  }
}

double direction(Point from, Point to) {
  return wrap_direction(std::atan2(static_cast<double>(to.y - from.y), static_cast<double>(to.x - from.x)));
}

}  // namespace

SkeletonMap binarize(const GrayImage& img, const BinarizeConfig& cfg) {
  if (cfg.block < 2) throw std::invalid_argument("binarize: block must be >= 2");
  SkeletonMap out(img.width(), img.height());
  constexpr int bins = 256;
  for (int by = 0; by < img.height(); by += cfg.block) {
    for (int bx = 0; bx < img.width(); bx += cfg.block) {
      const int ex = std::min(bx + cfg.block, img.width()), ey = std::min(by + cfg.block, img.height());
      double mean = 0.0, sq = 0.0;
      std::array<double, bins> hist{};
      const double n = static_cast<double>((ex - bx) * (ey - by));
      for (int y = by; y < ey; ++y) {
        for (int x = bx; x < ex; ++x) {
          const double v = img(x, y);
          mean += v;
          sq += v * v;
          hist[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(v * bins)))] += 1.0;
        }
      }
      mean /= n;
      if (sq / n - mean * mean < cfg.min_variance) continue;

      // Otsu: maximize between-class variance over bin boundaries.
      double total = 0.0;
      for (int i = 0; i < bins; ++i) total += hist[static_cast<std::size_t>(i)] * (i + 0.5);
      double w0 = 0.0, sum0 = 0.0, best = -1.0;
      int best_t = 0;
      for (int t = 0; t < bins - 1; ++t) {
        w0 += hist[static_cast<std::size_t>(t)];
        sum0 += hist[static_cast<std::size_t>(t)] * (t + 0.5);
        const double w1 = n - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0, m1 = (total - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
          best = between;
          best_t = t;
        }
      }
      const double thr = static_cast<double>(best_t + 1) / bins;
      for (int y = by; y < ey; ++y) {
        for (int x = bx; x < ex; ++x) out(x, y) = img(x, y) < thr ? 1 : 0;
      }
    }
  }
  return out;
}

SkeletonMap thin(const SkeletonMap& binary) {
  SkeletonMap s = binary;
  while (true) {
    const bool a = zhang_suen_pass(s, 0);
    const bool b = zhang_suen_pass(s, 1);
    if (!a && !b) break;
  }
  remove_staircases(s);
  return s;
}

SkeletonMap skeletonize(const GrayImage& enhanced, const BinarizeConfig& cfg) { return thin(binarize(enhanced, cfg)); }

int crossing_number(const SkeletonMap& skel, int x, int y) {
  const auto p = neighbours(skel, x, y);
  int d = 0;
  for (int i = 0; i < 8; ++i) d += std::abs(p[i] - p[(i + 1) % 8]);
  return d / 2;
}

SkeletonMap prune_spurs(const SkeletonMap& skel, int length) {
  SkeletonMap out = skel;
  if (length <= 0) return out;
  std::vector<Point> del;
  for (int y = 0; y < skel.height(); ++y) {
    for (int x = 0; x < skel.width(); ++x) {
      if (!skel(x, y) || crossing_number(skel, x, y) != 1) continue;
      const Trace t = follow(skel, {x, y}, {}, length);
      const bool short_branch = static_cast<int>(t.path.size()) < length;
      if (short_branch && (t.end == TraceEnd::junction || t.end == TraceEnd::terminal)) {
        del.insert(del.end(), t.path.begin(), t.path.end());
      }
    }
  }
  for (const auto& q : del) out(q.x, q.y) = 0;
  remove_staircases(out);
  return out;
}

MaskGrid skeleton_mask(const SkeletonMap& skel, int block) {
  if (block < 1) throw std::invalid_argument("skeleton_mask: block must be >= 1");
  const int bw = (skel.width() + block - 1) / block, bh = (skel.height() + block - 1) / block;
  cv::Mat blocks = cv::Mat::zeros(bh, bw, CV_8U);
  for (int y = 0; y < skel.height(); ++y) {
    for (int x = 0; x < skel.width(); ++x) {
      if (skel(x, y)) blocks.at<std::uint8_t>(y / block, x / block) = 1;
    }
  }
  cv::Mat closed;
  cv::morphologyEx(blocks, closed, cv::MORPH_CLOSE, cv::getStructuringElement(cv::MORPH_RECT, {3, 3}), {-1, -1}, 1,
                   cv::BORDER_CONSTANT, 0);
  MaskGrid mask(skel.width(), skel.height(), 0);
  for (int y = 0; y < skel.height(); ++y) {
    for (int x = 0; x < skel.width(); ++x) mask(x, y) = closed.at<std::uint8_t>(y / block, x / block);
  }
  return mask;
}

MinutiaSet extract_minutiae(const SkeletonMap& input, const MinutiaConfig& cfg) {
  const SkeletonMap skel = cfg.raw ? input : prune_spurs(input, cfg.spur_length);
  const int w = skel.width(), h = skel.height();

  cv::Mat dist;
  if (!cfg.raw) {
    const MaskGrid mask = skeleton_mask(skel, cfg.mask_block);
    cv::Mat padded = cv::Mat::zeros(h + 2, w + 2, CV_8U);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) padded.at<std::uint8_t>(y + 1, x + 1) = mask(x, y) ? 255 : 0;
    }
    cv::distanceTransform(padded, dist, cv::DIST_L2, cv::DIST_MASK_PRECISE, CV_32F);
  }

  MinutiaSet out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!skel(x, y)) continue;
      const int cn = crossing_number(skel, x, y);
      if (cn != 1 && cn != 3) continue;
      if (!cfg.raw && dist.at<float>(y + 1, x + 1) <= cfg.border_distance) continue;
      const Point p{x, y};
      Minutia m;
      m.x = x;
      m.y = y;
      if (cn == 1) {
        const Trace t = follow(skel, p, {}, cfg.trace_length + 1);
        m.kind = MinutiaKind::ending;
        m.angle = t.path.size() > 1 ? direction(t.path.back(), p) : 0.0;
      } else {
        // One start pixel per neighbour component, preferring 4-neighbours.
        const auto nb = neighbours(skel, x, y);
        std::vector<Point> starts;
        for (int i = 0; i < 8; ++i) {
          if (!nb[i]) continue;
          const bool prev = nb[(i + 7) % 8] != 0;
          if (prev) continue;
          int best = i;
          for (int j = i; j < i + 8 && nb[j % 8]; ++j) {
            if ((j % 8) % 2 == 0) {
              best = j % 8;
              break;
            }
          }
          starts.push_back({x + kDx[best], y + kDy[best]});
        }
        if (starts.size() != 3) continue;
        std::array<double, 3> dir{};
        for (std::size_t b = 0; b < 3; ++b) {
          std::vector<Point> visited = {p};
          for (std::size_t o = 0; o < 3; ++o) {
            if (o != b) visited.push_back(starts[o]);
          }
          const Trace t = follow(skel, starts[b], visited, cfg.trace_length);
          dir[b] = direction(p, t.path.back());
        }
        std::size_t stem = 0;
        double closest = 10.0;
        for (std::size_t a = 0; a < 3; ++a) {
          const std::size_t i = (a + 1) % 3, j = (a + 2) % 3;
          const double d = direction_difference(dir[i], dir[j]);
          if (d < closest) {
            closest = d;
            stem = a;
          }
        }
        m.kind = MinutiaKind::bifurcation;
        m.angle = wrap_direction(dir[stem] + std::numbers::pi);
      }
      out.add(m);
    }
  }
  return out;
}

MaskGrid minutia_map(const MinutiaSet& mins, int width, int height) {
  MaskGrid m(width, height, 0);
  for (const auto& mn : mins) {
    const int x = static_cast<int>(std::lround(mn.x)), y = static_cast<int>(std::lround(mn.y));
    if (!m.contains(x, y)) {
      throw std::invalid_argument("minutia_map: minutia at (" + std::to_string(mn.x) + "," + std::to_string(mn.y) +
                                  ") outside " + std::to_string(width) + "x" + std::to_string(height));
    }
    m(x, y) = 1;
  }
  return m;
}

}  // namespace fingergan::skeleton
