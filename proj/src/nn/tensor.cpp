#include "fingergan/nn/tensor.hpp"

#include <algorithm>

namespace fingergan::nn {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw std::invalid_argument("concat_channels: " + a.shape_string() + " vs " + b.shape_string());
  }
  Tensor out(a.n, a.c + b.c, a.h, a.w);
  for (int i = 0; i < a.n; ++i) {
    std::copy_n(a.sample(i), a.sample_size(), out.sample(i));
    std::copy_n(b.sample(i), b.sample_size(), out.sample(i) + a.sample_size());
  }
  return out;
}

void split_channels(const Tensor& t, int ca, Tensor& a, Tensor& b) {
  if (ca < 0 || ca > t.c) throw std::invalid_argument("split_channels: bad split");
  a = Tensor(t.n, ca, t.h, t.w);
  b = Tensor(t.n, t.c - ca, t.h, t.w);
  for (int i = 0; i < t.n; ++i) {
    std::copy_n(t.sample(i), a.sample_size(), a.sample(i));
    std::copy_n(t.sample(i) + a.sample_size(), b.sample_size(), b.sample(i));
  }
}

Tensor concat_batch(const Tensor& a, const Tensor& b) {
  if (a.c != b.c || a.h != b.h || a.w != b.w) {
    throw std::invalid_argument("concat_batch: " + a.shape_string() + " vs " + b.shape_string());
  }
  Tensor out(a.n + b.n, a.c, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

Tensor slice_batch(const Tensor& t, int begin, int end) {
  if (begin < 0 || end > t.n || begin > end) throw std::invalid_argument("slice_batch: bad range");
  Tensor out(end - begin, t.c, t.h, t.w);
  std::copy_n(t.sample(begin), out.size(), out.data.begin());
  return out;
}

}  // namespace fingergan::nn
