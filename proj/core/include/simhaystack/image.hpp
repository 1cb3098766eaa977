#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace simhaystack {

/// 8-bit raster, 1 (gray) or 3 (RGB) interleaved channels, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return samples_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::uint8_t at(int x, int y, int c = 0) const noexcept {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) noexcept {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::span<std::uint8_t> samples() noexcept { return samples_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// Real-valued single channel plane used by the transforms.
class FloatPlane {
 public:
  FloatPlane() = default;
  FloatPlane(int width, int height, double fill = 0.0);
  FloatPlane(int width, int height, std::vector<double> values);

  static FloatPlane from_gray(const RasterImage& gray);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double at(int x, int y) const noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Round half away from zero and clamp into [0, 255].
std::uint8_t to_intensity(double v) noexcept;

/// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B). Identity on gray input.
RasterImage to_grayscale(const RasterImage& img);

/// Replicate a gray image into three channels (identity on RGB).
RasterImage to_rgb(const RasterImage& img);

/// Per-axis resampling to exactly width x height: area averaging on axes that
/// shrink, bilinear (pixel-centre aligned) on axes that grow, copy on axes
/// that keep their size. Intensities are rounded once, at the end.
RasterImage resize(const RasterImage& img, int width, int height);

/// Copy of the rectangle [x0, x0 + w) x [y0, y0 + h). Throws InvalidInput if
/// it does not lie inside the image.
RasterImage crop(const RasterImage& img, int x0, int y0, int w, int h);

}  // namespace simhaystack
