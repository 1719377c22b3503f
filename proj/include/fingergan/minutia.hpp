#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fingergan {

enum class MinutiaKind { ending, bifurcation };

char kind_code(MinutiaKind kind) noexcept;

/// A ridge ending or bifurcation. `angle` is in [0,2pi), image coordinates.
struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;
  MinutiaKind kind = MinutiaKind::ending;

  friend bool operator==(const Minutia&, const Minutia&) = default;
};

/// Minutiae of one image. No two entries share a location; when the
/// image dimensions are known (non-zero) every entry lies inside them.
class MinutiaSet {
 public:
  MinutiaSet() = default;
  MinutiaSet(int width, int height) : width_(width), height_(height) {}

  /// Throws std::invalid_argument on duplicate location, out-of-bounds
  /// coordinates or angle outside [0,2pi).
  void add(const Minutia& m);

  const std::vector<Minutia>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const Minutia& operator[](std::size_t i) const { return items_[i]; }

  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  friend bool operator==(const MinutiaSet&, const MinutiaSet&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Minutia> items_;
};

/// Text format, one record per line: `x y angle_degrees kind` with kind in
/// {E,B} and angle in [0,360). Blank lines and lines starting with '#' are
/// skipped, except an optional `# size W H` header carrying image dims.
MinutiaSet read_minutiae(const std::filesystem::path& path);
MinutiaSet parse_minutiae(const std::string& text);
void write_minutiae(const MinutiaSet& set, const std::filesystem::path& path);
std::string format_minutiae(const MinutiaSet& set);

}  // namespace fingergan
