#pragma once

#include <filesystem>

#include "fingergan/types.hpp"

namespace fingergan {

/// Loads an 8-bit single-channel raster; pixel k maps to k/255.
GrayImage load_gray_image(const std::filesystem::path& path);
/// Writes an 8-bit PNG (or any format OpenCV infers from the extension);
/// each value is rounded to the nearest of 256 levels.
void save_gray_image(const GrayImage& img, const std::filesystem::path& path);

/// Ridge pixels are stored white (255).
void save_skeleton(const SkeletonMap& skel, const std::filesystem::path& path);
/// Pixels >= 128 are ridge.
SkeletonMap load_skeleton(const std::filesystem::path& path);

/// Quantizes to 8 bits and back, the exact effect of a save/load pair.
GrayImage quantize_8bit(const GrayImage& img);

/// Binary grid container: 8-byte magic "FGGRID1\0", uint32 width, uint32
/// height (little-endian), then width*height float32 values row-major.
void write_grid(const RealGrid& grid, const std::filesystem::path& path);
RealGrid read_grid(const std::filesystem::path& path);

}  // namespace fingergan
