#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "simhaystack/hashbits.hpp"
#include "simhaystack/image.hpp"

namespace simhaystack::testing {

using Gen = std::mt19937_64;

RasterImage random_image(Gen& gen, int width, int height, int channels, int lo = 0, int hi = 255);
BitHash random_hash(Gen& gen, std::size_t length);
std::vector<float> random_vector(Gen& gen, std::size_t dim, float lo = -1.0f, float hi = 1.0f);

/// Naive Hamming distance over test(), independent of the word packing.
std::size_t naive_hamming(const BitHash& a, const BitHash& b);
double naive_ber(const BitHash& a, const BitHash& b);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path data_dir();

}  // namespace simhaystack::testing
