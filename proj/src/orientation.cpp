#include "fingergan/orientation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fingergan::orientation {
namespace {

double clamped_at(const RealGrid& g, int x, int y) {
  x = std::clamp(x, 0, g.width() - 1);
  y = std::clamp(y, 0, g.height() - 1);
  return g(x, y);
}

void sobel(const RealGrid& img, RealGrid& gx, RealGrid& gy) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double a = clamped_at(img, x - 1, y - 1), b = clamped_at(img, x, y - 1), c = clamped_at(img, x + 1, y - 1);
      const double d = clamped_at(img, x - 1, y), f = clamped_at(img, x + 1, y);
      const double g = clamped_at(img, x - 1, y + 1), h = clamped_at(img, x, y + 1), i = clamped_at(img, x + 1, y + 1);
      gx(x, y) = (c + 2.0 * f + i) - (a + 2.0 * d + g);
      gy(x, y) = (g + 2.0 * h + i) - (a + 2.0 * b + c);
    }
  }
}

// Separable Gaussian blur with replicated borders.
RealGrid gaussian_blur(const RealGrid& in, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int t = -r; t <= r; ++t) sum += k[static_cast<std::size_t>(t + r)] = std::exp(-(t * t) / (2.0 * sigma * sigma));
  for (double& v : k) v /= sum;
  const int w = in.width(), h = in.height();
  RealGrid tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * in(std::clamp(x + t, 0, w - 1), y);
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * tmp(x, std::clamp(y + t, 0, h - 1));
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

OrientationField estimate_dense_orientation(const RealGrid& img, const DenseOrientationConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("orientation: sigma must be > 0");
  const int w = img.width(), h = img.height();
  RealGrid gx(w, h), gy(w, h), gxx(w, h), gyy(w, h), gxy(w, h);
  sobel(img, gx, gy);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    gxx.values()[i] = gx.values()[i] * gx.values()[i];
    gyy.values()[i] = gy.values()[i] * gy.values()[i];
    gxy.values()[i] = gx.values()[i] * gy.values()[i];
  }
  gxx = gaussian_blur(gxx, cfg.sigma);
  gyy = gaussian_blur(gyy, cfg.sigma);
  gxy = gaussian_blur(gxy, cfg.sigma);
  std::vector<double> energies(gx.size());
  for (std::size_t i = 0; i < gx.size(); ++i) energies[i] = gxx.values()[i] + gyy.values()[i];
  auto nth = energies.begin() + static_cast<std::ptrdiff_t>(energies.size() * 9 / 10);
  std::nth_element(energies.begin(), nth, energies.end());
  const double floor = std::max(cfg.min_energy, cfg.min_relative_energy * *nth);

  OrientationField out(w, h, 0.0, false);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double a = gxx.values()[i], b = gyy.values()[i], c = gxy.values()[i];
    const double energy = a + b;
    if (!(energy > floor)) {
      out.strength.values()[i] = 0.0;
      continue;
    }
    const double coh = std::clamp(std::hypot(a - b, 2.0 * c) / energy, 0.0, 1.0);
    out.angle.values()[i] = wrap_orientation(0.5 * std::atan2(2.0 * c, a - b) + std::numbers::pi / 2.0);
    out.strength.values()[i] = coh;
    out.mask.values()[i] = coh >= cfg.min_coherence ? 1 : 0;
  }
  return out;
}

RawOrientation estimate_raw_orientation(const RealGrid& img, const RawOrientationConfig& cfg) {
  if (cfg.block < 1) throw std::invalid_argument("orientation: block must be >= 1");
  const int w = img.width(), h = img.height();
  RealGrid gx(w, h), gy(w, h);
  sobel(img, gx, gy);

  RawOrientation out;
  out.block = cfg.block;
  out.field = OrientationField(w, h, 0.0, false);
  out.field.strength.fill(0.0);
  out.coherence = RealGrid(w, h, 0.0);

  for (int by = 0; by < h; by += cfg.block) {
    for (int bx = 0; bx < w; bx += cfg.block) {
      const int ex = std::min(bx + cfg.block, w), ey = std::min(by + cfg.block, h);
      double gxx = 0.0, gyy = 0.0, gxy = 0.0;
      for (int y = by; y < ey; ++y) {
        for (int x = bx; x < ex; ++x) {
          const double u = gx(x, y), v = gy(x, y);
          gxx += u * u;
          gyy += v * v;
          gxy += u * v;
        }
      }
      const double n = static_cast<double>((ex - bx) * (ey - by));
      const double energy = gxx + gyy;
      double coh = 0.0;
      double ridge = 0.0;
      bool valid = false;
      if (energy / n > cfg.min_energy) {
        coh = std::clamp(std::hypot(gxx - gyy, 2.0 * gxy) / energy, 0.0, 1.0);
        const double gradient_dir = 0.5 * std::atan2(2.0 * gxy, gxx - gyy);
        ridge = wrap_orientation(gradient_dir + std::numbers::pi / 2.0);
        valid = coh >= cfg.min_coherence;
      }
      for (int y = by; y < ey; ++y) {
        for (int x = bx; x < ex; ++x) {
          out.field.angle(x, y) = ridge;
          out.field.strength(x, y) = coh;
          out.field.mask(x, y) = valid ? 1 : 0;
          out.coherence(x, y) = coh;
        }
      }
    }
  }
  return out;
}

RawOrientation estimate_raw_orientation(const SkeletonMap& skel, const RawOrientationConfig& cfg) {
  return estimate_raw_orientation(skel.as_real(), cfg);
}

FomfeModel::FomfeModel(int order, int width, int height, std::vector<double> coeffs_cos, std::vector<double> coeffs_sin)
    : order_(order), width_(width), height_(height), coeffs_cos_(std::move(coeffs_cos)), coeffs_sin_(std::move(coeffs_sin)) {
  if (order < 0) throw std::invalid_argument("fomfe: order must be >= 0");
  if (width < 1 || height < 1) throw std::invalid_argument("fomfe: domain must be at least 1x1");
  const auto n = static_cast<std::size_t>(basis_size(order));
  if (coeffs_cos_.size() != n || coeffs_sin_.size() != n) {
    throw std::invalid_argument("fomfe: expected " + std::to_string(n) + " coefficients per component");
  }
}

void FomfeModel::basis(double x, double y, std::vector<double>& out) const {
  const int m = 2 * order_ + 1;
  out.resize(static_cast<std::size_t>(m * m));
  thread_local std::vector<double> fx, fy;
  fx.assign(m, 1.0);
  fy.assign(m, 1.0);
  const double tx = x / width_, ty = y / height_;
  for (int k = 1; k <= order_; ++k) {
    fx[2 * k - 1] = std::cos(k * std::numbers::pi * tx);
    fx[2 * k] = std::sin(k * std::numbers::pi * tx);
    fy[2 * k - 1] = std::cos(k * std::numbers::pi * ty);
    fy[2 * k] = std::sin(k * std::numbers::pi * ty);
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(j * m + i)] = fy[j] * fx[i];
  }
}

std::pair<double, double> FomfeModel::vector_at(double x, double y) const {
  thread_local std::vector<double> phi;
  basis(x, y, phi);
  double c = 0.0, s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    c += coeffs_cos_[i] * phi[i];
    s += coeffs_sin_[i] * phi[i];
  }
  return {c, s};
}

double FomfeModel::angle_at(double x, double y) const {
  const auto [c, s] = vector_at(x, y);
  return wrap_orientation(0.5 * std::atan2(s, c));
}

FomfeFit fit_fomfe(const OrientationField& field, const FomfeConfig& cfg) {
  if (cfg.order < 0) throw std::invalid_argument("fomfe: order must be >= 0");
  if (cfg.sample_step < 1) throw std::invalid_argument("fomfe: sample_step must be >= 1");
  const int w = field.width(), h = field.height();
  FomfeFit fit;
  for (int y = cfg.sample_step / 2; y < h; y += cfg.sample_step) {
    for (int x = cfg.sample_step / 2; x < w; x += cfg.sample_step) {
      if (!field.valid(x, y)) continue;
      const double t = field.angle(x, y), r = field.strength(x, y);
      fit.samples.push_back({static_cast<double>(x), static_cast<double>(y), r * std::cos(2.0 * t), r * std::sin(2.0 * t)});
    }
  }
  const int p = FomfeModel::basis_size(cfg.order);
  if (static_cast<int>(fit.samples.size()) < p) {
    throw std::invalid_argument("fomfe: " + std::to_string(fit.samples.size()) + " valid samples, need at least " +
                                std::to_string(p) + " for order " + std::to_string(cfg.order));
  }

  // Householder QR on the design matrix; the half-period basis is close to
  // collinear, and normal equations would square its condition number.
  const int n = static_cast<int>(fit.samples.size());
  const bool damped = cfg.ridge_damping > 0.0;
  FomfeModel scratch(cfg.order, w, h, std::vector<double>(p, 0.0), std::vector<double>(p, 0.0));
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n + (damped ? p : 0), p);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(design.rows(), 2);
  std::vector<double> phi;
  for (int i = 0; i < n; ++i) {
    const auto& s = fit.samples[static_cast<std::size_t>(i)];
    scratch.basis(s.x, s.y, phi);
    design.row(i) = Eigen::Map<const Eigen::RowVectorXd>(phi.data(), p);
    rhs(i, 0) = s.target_cos;
    rhs(i, 1) = s.target_sin;
  }
  if (damped) design.bottomRows(p).diagonal().setConstant(std::sqrt(cfg.ridge_damping));
  const Eigen::MatrixXd coeffs = design.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd ac = coeffs.col(0), as = coeffs.col(1);

  fit.model = FomfeModel(cfg.order, w, h, std::vector<double>(ac.data(), ac.data() + p),
                         std::vector<double>(as.data(), as.data() + p));
  fit.residual_cos.reserve(fit.samples.size());
  fit.residual_sin.reserve(fit.samples.size());
  for (const auto& s : fit.samples) {
    const auto [c, sn] = fit.model.vector_at(s.x, s.y);
    fit.residual_cos.push_back(c - s.target_cos);
    fit.residual_sin.push_back(sn - s.target_sin);
    fit.residual_sum_squares += fit.residual_cos.back() * fit.residual_cos.back() +
                                fit.residual_sin.back() * fit.residual_sin.back();
  }
  return fit;
}

double fit_residual(const FomfeModel& model, const std::vector<FitSample>& samples) {
  double rss = 0.0;
  for (const auto& s : samples) {
    const auto [c, sn] = model.vector_at(s.x, s.y);
    rss += (c - s.target_cos) * (c - s.target_cos) + (sn - s.target_sin) * (sn - s.target_sin);
  }
  return rss;
}

OrientationField evaluate_fomfe(const FomfeModel& model) {
  OrientationField out(model.width(), model.height(), 0.0, true);
  for (int y = 0; y < model.height(); ++y) {
    for (int x = 0; x < model.width(); ++x) {
      const auto [c, s] = model.vector_at(x, y);
      out.angle(x, y) = wrap_orientation(0.5 * std::atan2(s, c));
      out.strength(x, y) = std::hypot(c, s);
    }
  }
  return out;
}

}  // namespace fingergan::orientation
