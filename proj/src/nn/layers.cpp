#include "fingergan/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fingergan::nn {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

// cols[(c*k + ki)*k + kj][oy*wo + ox] = x[c][oy*s - p + ki][ox*s - p + kj], zero outside.
void im2col(const float* x, int c, int h, int w, const ConvGeometry& g, float* cols) {
  const int ho = g.output_size(h), wo = g.output_size(w), k = g.kernel;
  const std::size_t ncol = static_cast<std::size_t>(ho) * wo;
  for (int ci = 0; ci < c; ++ci) {
    const float* plane = x + static_cast<std::size_t>(ci) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        float* row = cols + (static_cast<std::size_t>(ci * k + ki) * k + kj) * ncol;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          float* dst = row + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill_n(dst, wo, 0.0f);
            continue;
          }
          const float* src = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0f;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates cols back into x (which must be zeroed by the caller).
void col2im(const float* cols, int c, int h, int w, const ConvGeometry& g, float* x) {
  const int ho = g.output_size(h), wo = g.output_size(w), k = g.kernel;
  const std::size_t ncol = static_cast<std::size_t>(ho) * wo;
  for (int ci = 0; ci < c; ++ci) {
    float* plane = x + static_cast<std::size_t>(ci) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const float* row = cols + (static_cast<std::size_t>(ci * k + ki) * k + kj) * ncol;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          if (iy < 0 || iy >= h) continue;
          const float* src = row + static_cast<std::size_t>(oy) * wo;
          float* dst = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

void init_normal(Param& p, RandomSource& rng, double stddev) {
  for (float& v : p.value) v = static_cast<float>(rng.normal(0.0, stddev));
}

}  // namespace

Param::Param(std::string name_, std::vector<int> shape_, float fill) : name(std::move(name_)), shape(std::move(shape_)) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                        [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  value.assign(n, fill);
  grad.assign(n, 0.0f);
}

void Param::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }

int ConvGeometry::output_size(int input) const {
  const int span = input + 2 * pad - kernel;
  if (span < 0 || span % stride != 0) {
    throw std::invalid_argument("convolution geometry: input " + std::to_string(input) + " incompatible with kernel " +
                                std::to_string(kernel) + ", stride " + std::to_string(stride) + ", pad " +
                                std::to_string(pad));
  }
  return span / stride + 1;
}

Conv2d::Conv2d(std::string name, int in, int out, ConvGeometry geom)
    : in_(in), out_(out), geom_(geom),
      weight_(name + ".weight", {out, in, geom.kernel, geom.kernel}),
      bias_(name + ".bias", {out}) {}

void Conv2d::init(RandomSource& rng, double stddev) {
  init_normal(weight_, rng, stddev);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0f);
}

Tensor Conv2d::forward(const Tensor& x, bool keep_input) {
  if (x.c != in_) throw std::invalid_argument(weight_.name + ": expected " + std::to_string(in_) + " channels, got " + x.shape_string());
  const int ho = geom_.output_size(x.h), wo = geom_.output_size(x.w);
  const int kk = in_ * geom_.kernel * geom_.kernel;
  const std::size_t ncol = static_cast<std::size_t>(ho) * wo;
  Tensor y(x.n, out_, ho, wo);
  FloatBuffer cols(static_cast<std::size_t>(kk) * ncol);
  const ConstMatMap wmat(weight_.value.data(), out_, kk);
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), in_, x.h, x.w, geom_, cols.data());
    MatMap ymat(y.sample(i), out_, static_cast<Eigen::Index>(ncol));
    ymat.noalias() = wmat * ConstMatMap(cols.data(), kk, static_cast<Eigen::Index>(ncol));
    for (int o = 0; o < out_; ++o) ymat.row(o).array() += bias_.value[static_cast<std::size_t>(o)];
  }
  if (keep_input) input_ = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = input_;
  if (x.n != dy.n || dy.c != out_) throw std::logic_error(weight_.name + ": backward without matching forward");
  const int kk = in_ * geom_.kernel * geom_.kernel;
  const std::size_t ncol = static_cast<std::size_t>(dy.h) * dy.w;
  Tensor dx(x.n, in_, x.h, x.w);
  FloatBuffer cols(static_cast<std::size_t>(kk) * ncol), dcols(cols.size());
  const ConstMatMap wmat(weight_.value.data(), out_, kk);
  MatMap dw(weight_.grad.data(), out_, kk);
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), in_, x.h, x.w, geom_, cols.data());
    const ConstMatMap dymat(dy.sample(i), out_, static_cast<Eigen::Index>(ncol));
    dw.noalias() += dymat * ConstMatMap(cols.data(), kk, static_cast<Eigen::Index>(ncol)).transpose();
    for (int o = 0; o < out_; ++o) bias_.grad[static_cast<std::size_t>(o)] += dymat.row(o).sum();
    MatMap(dcols.data(), kk, static_cast<Eigen::Index>(ncol)).noalias() = wmat.transpose() * dymat;
    col2im(dcols.data(), in_, x.h, x.w, geom_, dx.sample(i));
  }
  return dx;
}

ConvTranspose2d::ConvTranspose2d(std::string name, int in, int out, ConvGeometry geom)
    : in_(in), out_(out), geom_(geom),
      weight_(name + ".weight", {in, out, geom.kernel, geom.kernel}),
      bias_(name + ".bias", {out}) {}

void ConvTranspose2d::init(RandomSource& rng, double stddev) {
  init_normal(weight_, rng, stddev);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0f);
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool keep_input) {
  if (x.c != in_) throw std::invalid_argument(weight_.name + ": expected " + std::to_string(in_) + " channels, got " + x.shape_string());
  const int ho = (x.h - 1) * geom_.stride - 2 * geom_.pad + geom_.kernel;
  const int wo = (x.w - 1) * geom_.stride - 2 * geom_.pad + geom_.kernel;
  if (ho < 1 || wo < 1 || geom_.output_size(ho) != x.h || geom_.output_size(wo) != x.w) {
    throw std::invalid_argument(weight_.name + ": input " + x.shape_string() + " has no exact transposed geometry");
  }
  const int kk = out_ * geom_.kernel * geom_.kernel;
  const std::size_t hw = x.plane();
  Tensor y(x.n, out_, ho, wo);
  FloatBuffer cols(static_cast<std::size_t>(kk) * hw);
  const ConstMatMap wmat(weight_.value.data(), in_, kk);
  for (int i = 0; i < x.n; ++i) {
    MatMap(cols.data(), kk, static_cast<Eigen::Index>(hw)).noalias() =
        wmat.transpose() * ConstMatMap(x.sample(i), in_, static_cast<Eigen::Index>(hw));
    col2im(cols.data(), out_, ho, wo, geom_, y.sample(i));
    for (int o = 0; o < out_; ++o) {
      float* p = y.sample(i) + static_cast<std::size_t>(o) * y.plane();
      const float b = bias_.value[static_cast<std::size_t>(o)];
      for (std::size_t j = 0; j < y.plane(); ++j) p[j] += b;
    }
  }
  if (keep_input) input_ = x;
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy) {
  const Tensor& x = input_;
  if (x.n != dy.n || dy.c != out_) throw std::logic_error(weight_.name + ": backward without matching forward");
  const int kk = out_ * geom_.kernel * geom_.kernel;
  const std::size_t hw = x.plane();
  Tensor dx(x.n, in_, x.h, x.w);
  FloatBuffer dcols(static_cast<std::size_t>(kk) * hw);
  const ConstMatMap wmat(weight_.value.data(), in_, kk);
  MatMap dw(weight_.grad.data(), in_, kk);
  for (int i = 0; i < x.n; ++i) {
    im2col(dy.sample(i), out_, dy.h, dy.w, geom_, dcols.data());
    const ConstMatMap dc(dcols.data(), kk, static_cast<Eigen::Index>(hw));
    const ConstMatMap xmat(x.sample(i), in_, static_cast<Eigen::Index>(hw));
    dw.noalias() += xmat * dc.transpose();
    MatMap(dx.sample(i), in_, static_cast<Eigen::Index>(hw)).noalias() = wmat * dc;
    for (int o = 0; o < out_; ++o) {
      const float* p = dy.sample(i) + static_cast<std::size_t>(o) * dy.plane();
      double s = 0.0;
      for (std::size_t j = 0; j < dy.plane(); ++j) s += p[j];
      bias_.grad[static_cast<std::size_t>(o)] += static_cast<float>(s);
    }
  }
  return dx;
}

BatchNorm2d::BatchNorm2d(std::string name, int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum),
      gamma_(name + ".gamma", {channels}, 1.0f),
      beta_(name + ".beta", {channels}, 0.0f),
      running_mean_{name + ".running_mean", FloatBuffer(static_cast<std::size_t>(channels), 0.0f)},
      running_var_{name + ".running_var", FloatBuffer(static_cast<std::size_t>(channels), 1.0f)} {}

Tensor BatchNorm2d::forward(const Tensor& x, bool train, bool update_running_stats) {
  if (x.c != channels_) throw std::invalid_argument(gamma_.name + ": channel mismatch, got " + x.shape_string());
  const std::size_t plane = x.plane();
  const double m = static_cast<double>(x.n) * static_cast<double>(plane);
  Tensor y(x.n, x.c, x.h, x.w);
  xhat_ = Tensor(x.n, x.c, x.h, x.w);
  inv_std_.assign(static_cast<std::size_t>(channels_), 0.0f);
  last_train_ = train;
  for (int c = 0; c < channels_; ++c) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const float* p = x.sample(i) + static_cast<std::size_t>(c) * plane;
        for (std::size_t j = 0; j < plane; ++j) s += p[j];
      }
      mean = s / m;
      double sq = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const float* p = x.sample(i) + static_cast<std::size_t>(c) * plane;
        for (std::size_t j = 0; j < plane; ++j) sq += (p[j] - mean) * (p[j] - mean);
      }
      var = sq / m;
      if (update_running_stats) {
        const auto ci = static_cast<std::size_t>(c);
        const double unbiased = m > 1.0 ? sq / (m - 1.0) : var;
        running_mean_.value[ci] = static_cast<float>((1.0 - momentum_) * running_mean_.value[ci] + momentum_ * mean);
        running_var_.value[ci] = static_cast<float>((1.0 - momentum_) * running_var_.value[ci] + momentum_ * unbiased);
      }
    } else {
      mean = running_mean_.value[static_cast<std::size_t>(c)];
      var = running_var_.value[static_cast<std::size_t>(c)];
    }
    const float inv = static_cast<float>(1.0 / std::sqrt(var + eps_));
    const float g = gamma_.value[static_cast<std::size_t>(c)], b = beta_.value[static_cast<std::size_t>(c)];
    const float mu = static_cast<float>(mean);
    inv_std_[static_cast<std::size_t>(c)] = inv;
    for (int i = 0; i < x.n; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * x.sample_size() + static_cast<std::size_t>(c) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        const float xh = (x.data[off + j] - mu) * inv;
        xhat_.data[off + j] = xh;
        y.data[off + j] = g * xh + b;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  if (!dy.same_shape(xhat_)) throw std::logic_error(gamma_.name + ": backward without matching forward");
  const std::size_t plane = dy.plane();
  const double m = static_cast<double>(dy.n) * static_cast<double>(plane);
  Tensor dx(dy.n, dy.c, dy.h, dy.w);
  for (int c = 0; c < channels_; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < dy.n; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * dy.sample_size() + ci * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        sum_dy += dy.data[off + j];
        sum_dy_xhat += static_cast<double>(dy.data[off + j]) * xhat_.data[off + j];
      }
    }
    gamma_.grad[ci] += static_cast<float>(sum_dy_xhat);
    beta_.grad[ci] += static_cast<float>(sum_dy);
    const double g = gamma_.value[ci], inv = inv_std_[ci];
    for (int i = 0; i < dy.n; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * dy.sample_size() + ci * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        if (last_train_) {
          dx.data[off + j] = static_cast<float>(g * inv / m * (m * dy.data[off + j] - sum_dy - xhat_.data[off + j] * sum_dy_xhat));
        } else {
          dx.data[off + j] = static_cast<float>(g * inv * dy.data[off + j]);
        }
      }
    }
  }
  return dx;
}

void leaky_relu_inplace(Tensor& x, float slope) {
  for (float& v : x.data) v = v > 0.0f ? v : slope * v;
}

void leaky_relu_backward_inplace(Tensor& dy, const Tensor& y, float slope) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y.data[i] > 0.0f)) dy.data[i] *= slope;
  }
}

float sigmoid(float x) noexcept {
  if (x >= 0.0f) return 1.0f / (1.0f + std::exp(-x));
  const float e = std::exp(x);
  return e / (1.0f + e);
}

}  // namespace fingergan::nn
