#pragma once

#include <string>
#include <vector>

#include "fingergan/nn/tensor.hpp"
#include "fingergan/random.hpp"

namespace fingergan::nn {

/// Learnable array with its gradient accumulator.
struct Param {
  std::string name;
  std::vector<int> shape;
  FloatBuffer value;
  FloatBuffer grad;

  Param() = default;
  Param(std::string name_, std::vector<int> shape_, float fill = 0.0f);
  std::size_t size() const noexcept { return value.size(); }
  void zero_grad();
};

/// Non-learnable persistent array (batch-norm running statistics).
struct Buffer {
  std::string name;
  FloatBuffer value;
};

/// Convolution geometry shared by Conv2d and the adjoint used by ConvTranspose2d.
struct ConvGeometry {
  int kernel = 1;
  int stride = 1;
  int pad = 0;

  int output_size(int input) const;
};

/// Cross-correlation with bias. Weight layout [out][in][k][k].
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in, int out, ConvGeometry geom);

  Tensor forward(const Tensor& x, bool keep_input);
  /// Accumulates parameter gradients; returns dL/dx.
  Tensor backward(const Tensor& dy);

  void init(RandomSource& rng, double stddev);
  void collect(std::vector<Param*>& out) { out.push_back(&weight_); out.push_back(&bias_); }
  Param& weight() noexcept { return weight_; }
  Param& bias() noexcept { return bias_; }
  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }
  const ConvGeometry& geometry() const noexcept { return geom_; }
  /// Padding does not change the weight shape.
  void set_padding(int pad) noexcept { geom_.pad = pad; }
  std::size_t parameter_count() const noexcept { return weight_.size() + bias_.size(); }

 private:
  int in_ = 0, out_ = 0;
  ConvGeometry geom_;
  Param weight_, bias_;
  Tensor input_;
};

/// Transposed convolution (up-convolution) with bias. Weight layout
/// [in][out][k][k]; output size (H-1)*stride - 2*pad + k.
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, int in, int out, ConvGeometry geom);

  Tensor forward(const Tensor& x, bool keep_input);
  Tensor backward(const Tensor& dy);

  void init(RandomSource& rng, double stddev);
  void collect(std::vector<Param*>& out) { out.push_back(&weight_); out.push_back(&bias_); }
  Param& weight() noexcept { return weight_; }
  Param& bias() noexcept { return bias_; }
  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }
  const ConvGeometry& geometry() const noexcept { return geom_; }
  std::size_t parameter_count() const noexcept { return weight_.size() + bias_.size(); }

 private:
  int in_ = 0, out_ = 0;
  ConvGeometry geom_;
  Param weight_, bias_;
  Tensor input_;
};

/// Per-channel batch normalization. Training mode normalizes with batch
/// statistics (biased variance) and, when asked, folds them into the running
/// estimates with unbiased variance; evaluation mode uses the running values.
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels, double eps = 1e-5, double momentum = 0.1);

  Tensor forward(const Tensor& x, bool train, bool update_running_stats);
  Tensor backward(const Tensor& dy);

  void collect(std::vector<Param*>& out) { out.push_back(&gamma_); out.push_back(&beta_); }
  void collect_buffers(std::vector<Buffer*>& out) { out.push_back(&running_mean_); out.push_back(&running_var_); }
  Param& gamma() noexcept { return gamma_; }
  Param& beta() noexcept { return beta_; }
  std::size_t parameter_count() const noexcept { return gamma_.size() + beta_.size(); }

 private:
  int channels_ = 0;
  double eps_ = 1e-5, momentum_ = 0.1;
  Param gamma_, beta_;
  Buffer running_mean_, running_var_;
  bool last_train_ = true;
  Tensor xhat_;
  std::vector<float> inv_std_;
};

/// max(x, slope x) applied in place; the backward pass needs the forward
/// output, whose sign equals the input's for slope > 0.
void leaky_relu_inplace(Tensor& x, float slope);
void leaky_relu_backward_inplace(Tensor& dy, const Tensor& y, float slope);

float sigmoid(float x) noexcept;

}  // namespace fingergan::nn
