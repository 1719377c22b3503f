#include "fingergan/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <stdexcept>

namespace fingergan {
namespace {

cv::Mat read_8bit_gray(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("image not found: " + path.string());
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw std::runtime_error("unsupported or unreadable image format: " + path.string());
  if (raw.channels() != 1) {
    throw std::runtime_error("non-grayscale image rejected (" + std::to_string(raw.channels()) +
                             " channels): " + path.string());
  }
  if (raw.depth() != CV_8U) throw std::runtime_error("only 8-bit grayscale images are supported: " + path.string());
  return raw;
}

void write_mat(const cv::Mat& mat, const std::filesystem::path& path) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw std::runtime_error("cannot write image " + path.string() + ": " + e.what());
  }
  if (!ok) throw std::runtime_error("cannot write image " + path.string());
}

}  // namespace

GrayImage load_gray_image(const std::filesystem::path& path) {
  const cv::Mat raw = read_8bit_gray(path);
  RealGrid grid(raw.cols, raw.rows, 0.0);
  for (int y = 0; y < raw.rows; ++y) {
    const auto* row = raw.ptr<std::uint8_t>(y);
    for (int x = 0; x < raw.cols; ++x) grid(x, y) = snap_intensity(row[x] / 255.0);
  }
  return GrayImage::from_grid(std::move(grid));
}

void save_gray_image(const GrayImage& img, const std::filesystem::path& path) {
  cv::Mat mat(img.height(), img.width(), CV_8UC1);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width(); ++x) {
      row[x] = static_cast<std::uint8_t>(std::lround(std::clamp(img(x, y), 0.0, 1.0) * 255.0));
    }
  }
  write_mat(mat, path);
}

void save_skeleton(const SkeletonMap& skel, const std::filesystem::path& path) {
  cv::Mat mat(skel.height(), skel.width(), CV_8UC1);
  for (int y = 0; y < skel.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < skel.width(); ++x) row[x] = skel(x, y) ? 255 : 0;
  }
  write_mat(mat, path);
}

SkeletonMap load_skeleton(const std::filesystem::path& path) {
  const cv::Mat raw = read_8bit_gray(path);
  MaskGrid grid(raw.cols, raw.rows, 0);
  for (int y = 0; y < raw.rows; ++y) {
    const auto* row = raw.ptr<std::uint8_t>(y);
    for (int x = 0; x < raw.cols; ++x) grid(x, y) = row[x] >= 128 ? 1 : 0;
  }
  return SkeletonMap::from_grid(std::move(grid));
}

GrayImage quantize_8bit(const GrayImage& img) {
  RealGrid out(img.width(), img.height(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const long q = std::lround(std::clamp(img.values()[i], 0.0, 1.0) * 255.0);
    out.values()[i] = snap_intensity(static_cast<double>(q) / 255.0);
  }
  return GrayImage::from_grid(std::move(out));
}

}  // namespace fingergan
