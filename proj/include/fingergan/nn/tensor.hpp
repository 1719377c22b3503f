#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fingergan::nn {

/// 64-byte aligned allocation. Eigen peels vectorized loops according to
/// pointer alignment, so sums are bit-reproducible only when every buffer
/// starts on the same boundary.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;


/// Dense NCHW float tensor.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  FloatBuffer data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, float fill = 0.0f)
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
    if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw std::invalid_argument("tensor dimensions must be non-negative");
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  std::size_t sample_size() const noexcept { return static_cast<std::size_t>(c) * plane(); }

  float& at(int ni, int ci, int y, int x) noexcept { return data[index(ni, ci, y, x)]; }
  float at(int ni, int ci, int y, int x) const noexcept { return data[index(ni, ci, y, x)]; }

  float* sample(int ni) noexcept { return data.data() + static_cast<std::size_t>(ni) * sample_size(); }
  const float* sample(int ni) const noexcept { return data.data() + static_cast<std::size_t>(ni) * sample_size(); }

  bool same_shape(const Tensor& o) const noexcept { return n == o.n && c == o.c && h == o.h && w == o.w; }
  std::string shape_string() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }

 private:
  std::size_t index(int ni, int ci, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(ni) * c + ci) * h + y) * w + x;
  }
};

/// Concatenates along channels; batch and spatial dims must agree.
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Splits a channel-concatenated tensor back into its first `ca` channels and the rest.
void split_channels(const Tensor& t, int ca, Tensor& a, Tensor& b);
/// Concatenates along the batch dimension.
Tensor concat_batch(const Tensor& a, const Tensor& b);
/// Samples [begin, end) of the batch.
Tensor slice_batch(const Tensor& t, int begin, int end);

}  // namespace fingergan::nn
