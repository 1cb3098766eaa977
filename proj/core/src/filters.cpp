#include "simhaystack/filters.hpp"

#include <algorithm>
#include <cmath>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace {

void check_kernel(int k) {
  if (k != 3 && k != 5 && k != 7) {
    throw InvalidInput("filter kernel size must be 3, 5 or 7 (got " + std::to_string(k) + ")");
  }
}

}  // namespace

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(int kernel_size) {
  if (kernel_size < 1 || kernel_size % 2 == 0) throw InvalidInput("kernel size must be odd");
  const double sigma = 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8;
  const int half = kernel_size / 2;
  std::vector<double> taps(static_cast<std::size_t>(kernel_size));
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    taps[i + half] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[i + half];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

RasterImage gaussian_filter(const RasterImage& img, int kernel_size) {
  check_kernel(kernel_size);
  const auto taps = gaussian_kernel(kernel_size);
  const int half = kernel_size / 2;
  const int w = img.width();
  const int h = img.height();
  const int c = img.channels();
  const auto src = img.samples();

  std::vector<double> tmp(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          const int xx = reflect_index(x + k, w);
          acc += taps[k + half] * src[(static_cast<std::size_t>(y) * w + xx) * c + ch];
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * c + ch] = acc;
      }
    }
  }
  RasterImage out(w, h, c);
  auto dst = out.samples();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          const int yy = reflect_index(y + k, h);
          acc += taps[k + half] * tmp[(static_cast<std::size_t>(yy) * w + x) * c + ch];
        }
        dst[(static_cast<std::size_t>(y) * w + x) * c + ch] = to_intensity(acc);
      }
    }
  }
  return out;
}

RasterImage median_filter(const RasterImage& img, int kernel_size) {
  check_kernel(kernel_size);
  const int half = kernel_size / 2;
  const int w = img.width();
  const int h = img.height();
  const int c = img.channels();
  const auto src = img.samples();
  RasterImage out(w, h, c);
  auto dst = out.samples();

  // Sliding histogram per row (Huang): 256 bins, median = rank (k*k)/2.
  const int rank = kernel_size * kernel_size / 2;
  std::vector<int> xs(static_cast<std::size_t>(w + 2 * half));
  for (int i = 0; i < w + 2 * half; ++i) xs[i] = reflect_index(i - half, w);
  std::vector<int> ys(static_cast<std::size_t>(kernel_size));
  int hist[256];
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int k = 0; k < kernel_size; ++k) ys[k] = reflect_index(y + k - half, h);
      std::fill(std::begin(hist), std::end(hist), 0);
      const auto sample = [&](int yy, int xx) {
        return src[(static_cast<std::size_t>(yy) * w + xx) * c + ch];
      };
      for (int dx = 0; dx < kernel_size; ++dx) {
        for (int yy : ys) ++hist[sample(yy, xs[dx])];
      }
      for (int x = 0; x < w; ++x) {
        if (x > 0) {
          for (int yy : ys) {
            --hist[sample(yy, xs[x - 1])];
            ++hist[sample(yy, xs[x - 1 + kernel_size])];
          }
        }
        int seen = 0;
        int v = 0;
        for (; v < 256; ++v) {
          seen += hist[v];
          if (seen > rank) break;
        }
        dst[(static_cast<std::size_t>(y) * w + x) * c + ch] = static_cast<std::uint8_t>(v);
      }
    }
  }
  return out;
}

}  // namespace simhaystack
