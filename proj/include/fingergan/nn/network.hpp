#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fingergan/nn/layers.hpp"
#include "fingergan/nn/tensor.hpp"
#include "fingergan/random.hpp"

namespace fingergan::nn {

struct GeneratorSpec {
  int in_channels = 1;
  int base_channels = 64;  ///< C1 width; block k has base * 2^(k-1) channels
  float slope = 0.2f;
  int patch = 192;         ///< training patch side, multiple of 16

  void validate() const;
};

struct DiscriminatorSpec {
  int in_channels = 2;     ///< skeleton-like map, then encoded orientation
  int base_channels = 64;  ///< C1/C2 width; C3/C4 double it, C5/C6 quadruple it
  float slope = 0.2f;

  void validate() const;
};

/// Output shape of one named block, recorded by trace().
struct BlockShape {
  std::string name;
  int channels = 0, height = 0, width = 0;
};

/// Convolution (or up-convolution) followed by batch norm and an activation.
template <class Conv>
struct Block {
  enum class Activation { leaky, sigmoid, none };

  Conv conv;
  BatchNorm2d bn;
  Activation act = Activation::leaky;
  float slope = 0.2f;
  Tensor out;

  Tensor forward(const Tensor& x, bool train, bool update_stats);
  Tensor backward(const Tensor& dy);
  void collect(std::vector<Param*>& p) { conv.collect(p); bn.collect(p); }
  void collect_buffers(std::vector<Buffer*>& b) { bn.collect_buffers(b); }
};

using ConvBlock = Block<Conv2d>;
using UpBlock = Block<ConvTranspose2d>;

/// Skip-connected denoising autoencoder. Encoder C1..C5, decoder DC1..DC5.
/// DC(5-k) concatenates C_k's output after its up-sampling up-conv1, so its
/// up-conv2 takes twice the block width. Output in (0,1) by a final sigmoid.
class Generator {
 public:
  explicit Generator(const GeneratorSpec& spec = {});

  const GeneratorSpec& spec() const noexcept { return spec_; }
  void init(RandomSource& rng, double stddev = 0.02);

  /// Train mode normalizes with batch statistics, updates running
  /// statistics and keeps activations for backward().
  Tensor forward(const Tensor& x, bool train);
  /// Accumulates parameter gradients of the last training forward; returns dL/dx.
  Tensor backward(const Tensor& dy);

  /// Evaluation-mode forward recording each block's output shape.
  std::vector<BlockShape> trace(const Tensor& x);

  /// Replaces the C_k skip (k = 1..4) by zeros of the same shape.
  void set_skip_enabled(int k, bool enabled);
  bool skip_enabled(int k) const;

  std::vector<Param*> params();
  std::vector<Buffer*> buffers();
  std::size_t parameter_count();

 private:
  GeneratorSpec spec_;
  std::array<ConvBlock, 4> enc1_, enc2_;  // C1..C4 conv1, conv2
  ConvBlock c5_;
  std::array<UpBlock, 4> up1_, up2_;      // DC1..DC4 up-conv1, up-conv2
  UpBlock dc5_;
  std::array<bool, 4> skip_on_{true, true, true, true};
  std::vector<BlockShape>* trace_ = nullptr;
};

/// Seven-block CNN ending in a per-sample score. C1..C6 are 4x4 stride-2
/// pad-1 convolutions; C7 is 3x3 stride 1, valid when its input is at least
/// 3x3 and same-padded otherwise. The batch-normalized C7 map is averaged
/// spatially before the sigmoid.
class Discriminator {
 public:
  explicit Discriminator(const DiscriminatorSpec& spec = {});

  const DiscriminatorSpec& spec() const noexcept { return spec_; }
  void init(RandomSource& rng, double stddev = 0.02);

  /// Returns n x 1 x 1 x 1 scores in (0,1).
  Tensor forward(const Tensor& x, bool train, bool update_stats);
  /// Takes dL/dscore per sample; returns dL/dx.
  Tensor backward(const Tensor& dscore);

  std::vector<BlockShape> trace(const Tensor& x);

  std::vector<Param*> params();
  std::vector<Buffer*> buffers();
  std::size_t parameter_count();

 private:
  DiscriminatorSpec spec_;
  std::array<ConvBlock, 6> blocks_;
  ConvBlock c7_;
  Tensor score_;
  std::vector<BlockShape>* trace_ = nullptr;
};

/// FNV-1a 64 of a canonical architecture description; stored in checkpoints.
std::uint64_t spec_hash(const GeneratorSpec& g, const DiscriminatorSpec& d);
std::string canonical_spec(const GeneratorSpec& g, const DiscriminatorSpec& d);

/// Sum of squared values of all gradients, for diagnostics.
double grad_norm_sq(const std::vector<Param*>& params);
void zero_grads(const std::vector<Param*>& params);

}  // namespace fingergan::nn
