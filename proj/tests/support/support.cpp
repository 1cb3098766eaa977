#include "support.hpp"

#include <atomic>
#include <chrono>

namespace simhaystack::testing {

namespace fs = std::filesystem;

RasterImage random_image(Gen& gen, int width, int height, int channels, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::vector<std::uint8_t> s(static_cast<std::size_t>(width) * height * channels);
  for (auto& v : s) v = static_cast<std::uint8_t>(d(gen));
  return RasterImage(width, height, channels, std::move(s));
}

BitHash random_hash(Gen& gen, std::size_t length) {
  std::bernoulli_distribution coin(0.5);
  BitHash h(length);
  for (std::size_t i = 0; i < length; ++i) h.set(i, coin(gen));
  return h;
}

std::vector<float> random_vector(Gen& gen, std::size_t dim, float lo, float hi) {
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(dim);
  for (auto& x : v) x = d(gen);
  return v;
}

std::size_t naive_hamming(const BitHash& a, const BitHash& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a.test(i) != b.test(i);
  return n;
}

double naive_ber(const BitHash& a, const BitHash& b) {
  return static_cast<double>(naive_hamming(a, b)) / static_cast<double>(a.size());
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          ("simhaystack_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path data_dir() { return SIMHAYSTACK_TEST_DATA; }

}  // namespace simhaystack::testing
