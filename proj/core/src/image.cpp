#include "simhaystack/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) throw InvalidInput("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw InvalidInput("images have 1 or 3 channels");
}

// Weights of the source samples contributing to each destination sample
// along one axis.
struct Tap {
  int index;
  double weight;
};

std::vector<std::vector<Tap>> axis_taps(int src, int dst) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(dst));
  if (src == dst) {
    for (int i = 0; i < dst; ++i) taps[i] = {{i, 1.0}};
  } else if (dst < src) {
    // area averaging: destination cell i covers [i*s, (i+1)*s) in source units
    const double s = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      const double lo = i * s;
      const double hi = (i + 1) * s;
      for (int k = static_cast<int>(std::floor(lo)); k < src && k < hi; ++k) {
        const double w = std::min(hi, k + 1.0) - std::max(lo, static_cast<double>(k));
        if (w > 1e-12) taps[i].push_back({k, w / s});
      }
    }
  } else {
    const double s = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      double pos = (i + 0.5) * s - 0.5;
      pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
      const int k0 = static_cast<int>(std::floor(pos));
      const int k1 = std::min(k0 + 1, src - 1);
      const double f = pos - k0;
      if (k1 == k0 || f == 0.0) {
        taps[i] = {{k0, 1.0}};
      } else {
        taps[i] = {{k0, 1.0 - f}, {k1, f}};
      }
    }
  }
  return taps;
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  samples_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_shape(width, height, channels);
  if (samples_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidInput("sample count does not match " + std::to_string(width) + "x" +
                       std::to_string(height) + "x" + std::to_string(channels));
  }
}

FloatPlane::FloatPlane(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidInput("plane dimensions must be positive");
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

FloatPlane::FloatPlane(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1) throw InvalidInput("plane dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("value count does not match plane dimensions");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("plane values must be finite");
  }
}

FloatPlane FloatPlane::from_gray(const RasterImage& gray) {
  if (gray.channels() != 1) throw InvalidInput("from_gray expects a single-channel image");
  std::vector<double> values(gray.samples().begin(), gray.samples().end());
  return FloatPlane(gray.width(), gray.height(), std::move(values));
}

std::uint8_t to_intensity(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

RasterImage to_grayscale(const RasterImage& img) {
  if (img.channels() == 1) return img;
  RasterImage out(img.width(), img.height(), 1);
  const auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const double luma = 0.299 * src[3 * p] + 0.587 * src[3 * p + 1] + 0.114 * src[3 * p + 2];
    dst[p] = to_intensity(luma);
  }
  return out;
}

RasterImage to_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  RasterImage out(img.width(), img.height(), 3);
  const auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    dst[3 * p] = dst[3 * p + 1] = dst[3 * p + 2] = src[p];
  }
  return out;
}

RasterImage resize(const RasterImage& img, int width, int height) {
  if (width < 1 || height < 1) throw InvalidInput("resize target must be at least 1x1");
  if (width == img.width() && height == img.height()) return img;

  const int c = img.channels();
  const auto xt = axis_taps(img.width(), width);
  const auto yt = axis_taps(img.height(), height);

  // horizontal pass into doubles, vertical pass rounds once
  std::vector<double> tmp(static_cast<std::size_t>(width) * img.height() * c, 0.0);
  const auto src = img.samples();
  for (int y = 0; y < img.height(); ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * img.width() * c;
    for (int x = 0; x < width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const Tap& t : xt[x]) acc += t.weight * src[row + static_cast<std::size_t>(t.index) * c + ch];
        tmp[(static_cast<std::size_t>(y) * width + x) * c + ch] = acc;
      }
    }
  }
  RasterImage out(width, height, c);
  auto dst = out.samples();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const Tap& t : yt[y]) acc += t.weight * tmp[(static_cast<std::size_t>(t.index) * width + x) * c + ch];
        dst[(static_cast<std::size_t>(y) * width + x) * c + ch] = to_intensity(acc);
      }
    }
  }
  return out;
}

RasterImage crop(const RasterImage& img, int x0, int y0, int w, int h) {
  if (w < 1 || h < 1 || x0 < 0 || y0 < 0 || x0 + w > img.width() || y0 + h > img.height()) {
    throw InvalidInput("crop rectangle outside the image");
  }
  const int c = img.channels();
  RasterImage out(w, h, c);
  const auto src = img.samples();
  auto dst = out.samples();
  for (int y = 0; y < h; ++y) {
    const auto* from = src.data() + (static_cast<std::size_t>(y0 + y) * img.width() + x0) * c;
    std::copy(from, from + static_cast<std::size_t>(w) * c,
              dst.data() + static_cast<std::size_t>(y) * w * c);
  }
  return out;
}

}  // namespace simhaystack
