#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fingergan/image_io.hpp"

namespace fingergan {
namespace {

constexpr std::array<char, 8> kGridMagic = {'F', 'G', 'G', 'R', 'I', 'D', '1', '\0'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated grid file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_grid(const RealGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write grid file " + path.string());
  out.write(kGridMagic.data(), kGridMagic.size());
  put_u32(out, static_cast<std::uint32_t>(grid.width()));
  put_u32(out, static_cast<std::uint32_t>(grid.height()));
  for (double v : grid.values()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
  if (!out) throw std::runtime_error("failed writing grid file " + path.string());
}

RealGrid read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grid file " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kGridMagic) {
    throw std::runtime_error("not a grid file (bad magic): " + path.string());
  }
  const auto w = get_u32(in);
  const auto h = get_u32(in);
  if (w > (1u << 16) || h > (1u << 16)) throw std::runtime_error("grid dimensions implausible: " + path.string());
  RealGrid grid(static_cast<int>(w), static_cast<int>(h), 0.0);
  for (double& v : grid.values()) {
    const std::uint32_t bits = get_u32(in);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    v = f;
  }
  return grid;
}

}  // namespace fingergan
