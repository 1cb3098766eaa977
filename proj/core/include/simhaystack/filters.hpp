#pragma once

#include <vector>

#include "simhaystack/image.hpp"

namespace simhaystack {

/// Index into [0, n) mirrored about the edge samples without repeating them
/// (`dcb|abcd|cba`).
int reflect_index(int i, int n) noexcept;

/// Normalised 1-D Gaussian taps for an odd kernel size, with
/// sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8.
std::vector<double> gaussian_kernel(int kernel_size);

/// Separable Gaussian blur, reflected borders. kernel_size in {3, 5, 7}.
RasterImage gaussian_filter(const RasterImage& img, int kernel_size);

/// Per-channel k x k sliding median, reflected borders. kernel_size in {3, 5, 7}.
RasterImage median_filter(const RasterImage& img, int kernel_size);

}  // namespace simhaystack
