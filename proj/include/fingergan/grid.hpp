#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fingergan {

/// Dense row-major 2-D grid. The workhorse container for images, masks,
/// orientation angles and weight maps.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw std::invalid_argument("grid dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Grid(int width, int height, std::vector<T> values) : width_(width), height_(height), data_(std::move(values)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("grid value count does not match dimensions");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  T& at(int x, int y) {
    check(x, y);
    return data_[index(x, y)];
  }
  const T& at(int x, int y) const {
    check(x, y);
    return data_[index(x, y)];
  }

  /// Value at (x,y), or `outside` when the coordinate leaves the grid.
  T get_or(int x, int y, T outside) const noexcept { return contains(x, y) ? data_[index(x, y)] : outside; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  bool same_dims(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  void check(int x, int y) const {
    if (!contains(x, y)) {
      throw std::out_of_range("grid index (" + std::to_string(x) + "," + std::to_string(y) + ") outside " +
                              std::to_string(width_) + "x" + std::to_string(height_));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using MaskGrid = Grid<std::uint8_t>;

template <typename T, typename U>
void require_same_dims(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (!a.same_dims(b)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

}  // namespace fingergan
