#include "fingergan/tvdecomp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fingergan/log.hpp"

namespace fingergan::tv {
namespace {

// Forward differences with Neumann boundary (zero difference on the last
// column/row).
void gradient(const RealGrid& u, RealGrid& gx, RealGrid& gy) {
  const int w = u.width(), h = u.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gx(x, y) = x + 1 < w ? u(x + 1, y) - u(x, y) : 0.0;
      gy(x, y) = y + 1 < h ? u(x, y + 1) - u(x, y) : 0.0;
    }
  }
}

// Negative adjoint of `gradient`.
void divergence(const RealGrid& px, const RealGrid& py, RealGrid& out) {
  const int w = px.width(), h = px.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double d = 0.0;
      if (w > 1) {
        if (x == 0) d += px(x, y);
        else if (x == w - 1) d -= px(x - 1, y);
        else d += px(x, y) - px(x - 1, y);
      }
      if (h > 1) {
        if (y == 0) d += py(x, y);
        else if (y == h - 1) d -= py(x, y - 1);
        else d += py(x, y) - py(x, y - 1);
      }
      out(x, y) = d;
    }
  }
}

}  // namespace

void TVConfig::validate() const {
  if (!(fidelity_weight > 0.0)) throw std::invalid_argument("tv: fidelity_weight must be > 0");
  if (max_iters < 1) throw std::invalid_argument("tv: max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tv: tolerance must be > 0");
  if (!(step > 0.0 && step <= 0.125)) throw std::invalid_argument("tv: step must lie in (0, 1/8]");
}

GrayImage Decomposition::scaled_texture(TextureScaling scaling) const {
  RealGrid out(texture.width(), texture.height(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = scaling.offset + scaling.scale * texture.values()[i];
  return GrayImage::clamped(std::move(out));
}

double total_variation(const RealGrid& u) {
  RealGrid gx(u.width(), u.height()), gy(u.width(), u.height());
  gradient(u, gx, gy);
  double tv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) tv += std::hypot(gx.values()[i], gy.values()[i]);
  return tv;
}

double rof_objective(const RealGrid& u, const RealGrid& f, double lambda) {
  require_same_dims(u, f, "rof_objective");
  double fid = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u.values()[i] - f.values()[i];
    fid += d * d;
  }
  return total_variation(u) + 0.5 * lambda * fid;
}

Decomposition decompose(const GrayImage& img, const TVConfig& cfg, bool track_objective) {
  cfg.validate();
  const int w = img.width(), h = img.height();
  const double lambda = cfg.fidelity_weight;
  RealGrid f(w, h);
  for (std::size_t i = 0; i < f.size(); ++i) f.values()[i] = snap_intensity(img.values()[i]);

  RealGrid px(w, h, 0.0), py(w, h, 0.0), div(w, h, 0.0), gx(w, h), gy(w, h), arg(w, h), u(w, h);
  Decomposition result;

  auto current_u = [&] {
    for (std::size_t i = 0; i < u.size(); ++i) u.values()[i] = f.values()[i] - div.values()[i] / lambda;
  };

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (track_objective) {
      current_u();
      result.objective.push_back(rof_objective(u, f, lambda));
    }
    for (std::size_t i = 0; i < arg.size(); ++i) arg.values()[i] = div.values()[i] - lambda * f.values()[i];
    gradient(arg, gx, gy);
    double max_change = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double gxv = gx.values()[i], gyv = gy.values()[i];
      const double denom = 1.0 + cfg.step * std::hypot(gxv, gyv);
      const double nx = (px.values()[i] + cfg.step * gxv) / denom;
      const double ny = (py.values()[i] + cfg.step * gyv) / denom;
      max_change = std::max({max_change, std::fabs(nx - px.values()[i]), std::fabs(ny - py.values()[i])});
      px.values()[i] = nx;
      py.values()[i] = ny;
    }
    divergence(px, py, div);
    if (max_change < cfg.tolerance) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.iterations = it;
  current_u();
  if (track_objective) result.objective.push_back(rof_objective(u, f, lambda));
  if (!result.converged) {
    // Once per process.
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      log::debug("tv decomposition hit max_iters=" + std::to_string(cfg.max_iters) +
                " before tolerance; returning the last iterate");
    }
  }

  RealGrid cartoon(w, h), texture(w, h);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double c = snap_intensity(std::clamp(u.values()[i], 0.0, 1.0));
    cartoon.values()[i] = c;
    texture.values()[i] = f.values()[i] - c;
  }
  result.cartoon = GrayImage::from_grid(std::move(cartoon));
  result.texture = std::move(texture);
  return result;
}

GrayImage texture_component(const GrayImage& img, const TVConfig& cfg, TextureScaling scaling) {
  return decompose(img, cfg).scaled_texture(scaling);
}

}  // namespace fingergan::tv
