#include "fingergan/nn/network.hpp"

#include <cstdio>
#include <stdexcept>

namespace fingergan::nn {
namespace {

constexpr ConvGeometry kSame3{3, 1, 1};
constexpr ConvGeometry kDown2{2, 2, 0};
constexpr ConvGeometry kDown4{4, 2, 1};

template <class Conv>
void configure(Block<Conv>& b, const std::string& name, const std::string& bn_name, int in, int out, ConvGeometry g,
               float slope, typename Block<Conv>::Activation act) {
  b.conv = Conv(name, in, out, g);
  b.bn = BatchNorm2d(bn_name, out);
  b.slope = slope;
  b.act = act;
}

void record(std::vector<BlockShape>* trace, const std::string& name, const Tensor& t) {
  if (trace) trace->push_back({name, t.c, t.h, t.w});
}

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

}  // namespace

template <class Conv>
Tensor Block<Conv>::forward(const Tensor& x, bool train, bool update_stats) {
  Tensor y = bn.forward(conv.forward(x, train), train, update_stats);
  switch (act) {
    case Activation::leaky:
      leaky_relu_inplace(y, slope);
      break;
    case Activation::sigmoid:
      for (float& v : y.data) v = sigmoid(v);
      break;
    case Activation::none:
      break;
  }
  if (train) out = y;
  return y;
}

template <class Conv>
Tensor Block<Conv>::backward(const Tensor& dy) {
  if (!dy.same_shape(out)) throw std::logic_error("block backward: shape " + dy.shape_string() + " does not match forward");
  Tensor d = dy;
  switch (act) {
    case Activation::leaky:
      leaky_relu_backward_inplace(d, out, slope);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < d.size(); ++i) d.data[i] *= out.data[i] * (1.0f - out.data[i]);
      break;
    case Activation::none:
      break;
  }
  return conv.backward(bn.backward(d));
}

template struct Block<Conv2d>;
template struct Block<ConvTranspose2d>;

void GeneratorSpec::validate() const {
  if (in_channels < 1 || base_channels < 1) throw std::invalid_argument("generator: channel counts must be >= 1");
  if (!(slope >= 0.0f && slope < 1.0f)) throw std::invalid_argument("generator: leaky slope must lie in [0,1)");
  if (patch < 16 || patch % 16 != 0) throw std::invalid_argument("generator: patch must be a positive multiple of 16");
}

void DiscriminatorSpec::validate() const {
  if (in_channels < 1 || base_channels < 1) throw std::invalid_argument("discriminator: channel counts must be >= 1");
  if (!(slope >= 0.0f && slope < 1.0f)) throw std::invalid_argument("discriminator: leaky slope must lie in [0,1)");
}

Generator::Generator(const GeneratorSpec& spec) : spec_(spec) {
  spec_.validate();
  using A = ConvBlock::Activation;
  const int b = spec_.base_channels;
  for (int k = 0; k < 4; ++k) {
    const std::string blk = "G.C" + std::to_string(k + 1);
    const int out = b << k;
    const int in = k == 0 ? spec_.in_channels : b << (k - 1);
    configure(enc1_[static_cast<std::size_t>(k)], blk + ".conv1", blk + ".bn1", in, out, k == 0 ? kSame3 : kDown2,
              spec_.slope, A::leaky);
    configure(enc2_[static_cast<std::size_t>(k)], blk + ".conv2", blk + ".bn2", out, out, kSame3, spec_.slope, A::leaky);
  }
  configure(c5_, "G.C5.conv1", "G.C5.bn1", b << 3, b << 4, kDown2, spec_.slope, A::leaky);
  using U = UpBlock::Activation;
  for (int i = 0; i < 4; ++i) {
    const std::string blk = "G.DC" + std::to_string(i + 1);
    const int width = b << (3 - i);
    configure(up1_[static_cast<std::size_t>(i)], blk + ".upconv1", blk + ".bn1", 2 * width, width, kDown2, spec_.slope,
              U::leaky);
    configure(up2_[static_cast<std::size_t>(i)], blk + ".upconv2", blk + ".bn2", 2 * width, width, kSame3, spec_.slope,
              U::leaky);
  }
  configure(dc5_, "G.DC5.upconv1", "G.DC5.bn1", b, 1, kSame3, spec_.slope, U::sigmoid);
}

void Generator::init(RandomSource& rng, double stddev) {
  for (int k = 0; k < 4; ++k) {
    enc1_[static_cast<std::size_t>(k)].conv.init(rng, stddev);
    enc2_[static_cast<std::size_t>(k)].conv.init(rng, stddev);
  }
  c5_.conv.init(rng, stddev);
  for (int i = 0; i < 4; ++i) {
    up1_[static_cast<std::size_t>(i)].conv.init(rng, stddev);
    up2_[static_cast<std::size_t>(i)].conv.init(rng, stddev);
  }
  dc5_.conv.init(rng, stddev);
}

Tensor Generator::forward(const Tensor& x, bool train) {
  if (x.c != spec_.in_channels) throw std::invalid_argument("generator: expected " + std::to_string(spec_.in_channels) + " input channels, got " + x.shape_string());
  if (x.h % 16 != 0 || x.w % 16 != 0 || x.h == 0 || x.w == 0) {
    throw std::invalid_argument("generator: spatial size must be a positive multiple of 16, got " + x.shape_string());
  }
  std::array<Tensor, 4> skips;
  Tensor h = x;
  for (std::size_t k = 0; k < 4; ++k) {
    h = enc1_[k].forward(h, train, train);
    h = enc2_[k].forward(h, train, train);
    record(trace_, "C" + std::to_string(k + 1), h);
    skips[k] = h;
  }
  h = c5_.forward(h, train, train);
  record(trace_, "C5", h);
  for (std::size_t i = 0; i < 4; ++i) {
    h = up1_[i].forward(h, train, train);
    const std::size_t s = 3 - i;
    const Tensor& skip = skip_on_[s] ? skips[s] : Tensor(skips[s].n, skips[s].c, skips[s].h, skips[s].w);
    h = up2_[i].forward(concat_channels(h, skip), train, train);
    record(trace_, "DC" + std::to_string(i + 1), h);
  }
  h = dc5_.forward(h, train, train);
  record(trace_, "DC5", h);
  return h;
}

Tensor Generator::backward(const Tensor& dy) {
  std::array<Tensor, 4> dskips;
  Tensor d = dc5_.backward(dy);
  for (int i = 3; i >= 0; --i) {
    const auto iu = static_cast<std::size_t>(i);
    const Tensor dcat = up2_[iu].backward(d);
    const int width = up1_[iu].conv.out_channels();
    Tensor dup;
    split_channels(dcat, width, dup, dskips[3 - iu]);
    d = up1_[iu].backward(dup);
  }
  d = c5_.backward(d);
  for (int k = 3; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    if (skip_on_[ku]) {
      for (std::size_t j = 0; j < d.size(); ++j) d.data[j] += dskips[ku].data[j];
    }
    d = enc2_[ku].backward(d);
    d = enc1_[ku].backward(d);
  }
  return d;
}

std::vector<BlockShape> Generator::trace(const Tensor& x) {
  std::vector<BlockShape> out;
  out.push_back({"input", x.c, x.h, x.w});
  trace_ = &out;
  try {
    forward(x, false);
  } catch (...) {
    trace_ = nullptr;
    throw;
  }
  trace_ = nullptr;
  return out;
}

void Generator::set_skip_enabled(int k, bool enabled) {
  if (k < 1 || k > 4) throw std::invalid_argument("generator: skip index must be 1..4");
  skip_on_[static_cast<std::size_t>(k - 1)] = enabled;
}

bool Generator::skip_enabled(int k) const {
  if (k < 1 || k > 4) throw std::invalid_argument("generator: skip index must be 1..4");
  return skip_on_[static_cast<std::size_t>(k - 1)];
}

std::vector<Param*> Generator::params() {
  std::vector<Param*> p;
  for (std::size_t k = 0; k < 4; ++k) {
    enc1_[k].collect(p);
    enc2_[k].collect(p);
  }
  c5_.collect(p);
  for (std::size_t i = 0; i < 4; ++i) {
    up1_[i].collect(p);
    up2_[i].collect(p);
  }
  dc5_.collect(p);
  return p;
}

std::vector<Buffer*> Generator::buffers() {
  std::vector<Buffer*> b;
  for (std::size_t k = 0; k < 4; ++k) {
    enc1_[k].collect_buffers(b);
    enc2_[k].collect_buffers(b);
  }
  c5_.collect_buffers(b);
  for (std::size_t i = 0; i < 4; ++i) {
    up1_[i].collect_buffers(b);
    up2_[i].collect_buffers(b);
  }
  dc5_.collect_buffers(b);
  return b;
}

std::size_t Generator::parameter_count() {
  std::size_t n = 0;
  for (const Param* p : params()) n += p->size();
  return n;
}

Discriminator::Discriminator(const DiscriminatorSpec& spec) : spec_(spec) {
  spec_.validate();
  using A = ConvBlock::Activation;
  const int b = spec_.base_channels;
  const int widths[6] = {b, b, 2 * b, 2 * b, 4 * b, 4 * b};
  for (int k = 0; k < 6; ++k) {
    const std::string blk = "D.C" + std::to_string(k + 1);
    const int in = k == 0 ? spec_.in_channels : widths[k - 1];
    configure(blocks_[static_cast<std::size_t>(k)], blk + ".conv", blk + ".bn", in, widths[k], kDown4, spec_.slope,
              A::leaky);
  }
  configure(c7_, "D.C7.conv", "D.C7.bn", widths[5], 1, ConvGeometry{3, 1, 0}, spec_.slope, A::none);
}

void Discriminator::init(RandomSource& rng, double stddev) {
  for (auto& b : blocks_) b.conv.init(rng, stddev);
  c7_.conv.init(rng, stddev);
}

Tensor Discriminator::forward(const Tensor& x, bool train, bool update_stats) {
  if (x.c != spec_.in_channels) throw std::invalid_argument("discriminator: expected " + std::to_string(spec_.in_channels) + " input channels, got " + x.shape_string());
  Tensor h = x;
  for (std::size_t k = 0; k < 6; ++k) {
    h = blocks_[k].forward(h, train, update_stats);
    record(trace_, "C" + std::to_string(k + 1), h);
  }
  c7_.conv.set_padding(h.h >= 3 && h.w >= 3 ? 0 : 1);
  const Tensor map = c7_.forward(h, train, update_stats);
  record(trace_, "C7", map);
  Tensor score(x.n, 1, 1, 1);
  const std::size_t plane = map.plane();
  for (int i = 0; i < x.n; ++i) {
    double s = 0.0;
    const float* p = map.sample(i);
    for (std::size_t j = 0; j < plane; ++j) s += p[j];
    score.data[static_cast<std::size_t>(i)] = sigmoid(static_cast<float>(s / static_cast<double>(plane)));
  }
  record(trace_, "score", score);
  if (train) score_ = score;
  return score;
}

Tensor Discriminator::backward(const Tensor& dscore) {
  if (!dscore.same_shape(score_)) throw std::logic_error("discriminator backward: no matching training forward");
  const Tensor& map = c7_.out;
  Tensor dmap(map.n, map.c, map.h, map.w);
  const auto plane = static_cast<float>(map.plane());
  for (int i = 0; i < map.n; ++i) {
    const float s = score_.data[static_cast<std::size_t>(i)];
    const float dlogit = dscore.data[static_cast<std::size_t>(i)] * s * (1.0f - s);
    float* p = dmap.sample(i);
    for (std::size_t j = 0; j < map.plane(); ++j) p[j] = dlogit / plane;
  }
  Tensor d = c7_.backward(dmap);
  for (int k = 5; k >= 0; --k) d = blocks_[static_cast<std::size_t>(k)].backward(d);
  return d;
}

std::vector<BlockShape> Discriminator::trace(const Tensor& x) {
  std::vector<BlockShape> out;
  out.push_back({"input", x.c, x.h, x.w});
  trace_ = &out;
  try {
    forward(x, false, false);
  } catch (...) {
    trace_ = nullptr;
    throw;
  }
  trace_ = nullptr;
  return out;
}

std::vector<Param*> Discriminator::params() {
  std::vector<Param*> p;
  for (auto& b : blocks_) b.collect(p);
  c7_.collect(p);
  return p;
}

std::vector<Buffer*> Discriminator::buffers() {
  std::vector<Buffer*> out;
  for (auto& b : blocks_) b.collect_buffers(out);
  c7_.collect_buffers(out);
  return out;
}

std::size_t Discriminator::parameter_count() {
  std::size_t n = 0;
  for (const Param* p : params()) n += p->size();
  return n;
}

std::string canonical_spec(const GeneratorSpec& g, const DiscriminatorSpec& d) {
  return "generator:in=" + std::to_string(g.in_channels) + ";base=" + std::to_string(g.base_channels) +
         ";slope=" + format_float(g.slope) + ";skip=concat-after-upconv1" + "|discriminator:in=" +
         std::to_string(d.in_channels) + ";base=" + std::to_string(d.base_channels) + ";slope=" + format_float(d.slope) +
         ";c7=bn-spatial-mean";
}

std::uint64_t spec_hash(const GeneratorSpec& g, const DiscriminatorSpec& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : canonical_spec(g, d)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

double grad_norm_sq(const std::vector<Param*>& params) {
  double s = 0.0;
  for (const Param* p : params) {
    for (const float v : p->grad) s += static_cast<double>(v) * v;
  }
  return s;
}

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) p->zero_grad();
}

}  // namespace fingergan::nn
