#include "simhaystack/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include "simhaystack/error.hpp"
#include "simhaystack/image_io.hpp"
#include "simhaystack/rng.hpp"

namespace simhaystack {

namespace fs = std::filesystem;

namespace {

std::string synthetic_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn_%06zu.png", i);
  return buf;
}

std::array<double, 3> random_colour(Rng& rng) {
  return {255.0 * rng.uniform(), 255.0 * rng.uniform(), 255.0 * rng.uniform()};
}

}  // namespace

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

DirectoryCorpus::DirectoryCorpus(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) throw DataError("image directory not found: " + root_.string());
  std::map<std::string, fs::path> found;
  for (fs::recursive_directory_iterator it(root_, fs::directory_options::follow_directory_symlink, ec), end;
       it != end; it.increment(ec)) {
    if (ec) throw DataError("cannot list " + root_.string() + ": " + ec.message());
    if (!it->is_regular_file() || !is_image_file(it->path())) continue;
    const std::string id = it->path().filename().string();
    auto [pos, inserted] = found.emplace(id, it->path());
    if (!inserted) {
      throw DataError("duplicate image name '" + id + "': " + pos->second.string() + " and " + it->path().string());
    }
  }
  if (ec) throw DataError("cannot list " + root_.string() + ": " + ec.message());
  for (auto& [id, path] : found) {
    ids_.push_back(id);
    paths_.push_back(path);
  }
}

fs::path DirectoryCorpus::path_of(std::string_view id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) throw DataError("image '" + std::string(id) + "' not in " + root_.string());
  return paths_[static_cast<std::size_t>(it - ids_.begin())];
}

RasterImage DirectoryCorpus::load(std::string_view id) const { return read_image(path_of(id)); }

std::string DirectoryCorpus::describe() const {
  return "directory " + root_.string() + " (" + std::to_string(ids_.size()) + " images)";
}

SyntheticCorpus::SyntheticCorpus(std::size_t count, int width, int height, std::uint64_t seed)
    : width_(width), height_(height), seed_(seed) {
  if (width < 8 || height < 8) throw InvalidInput("synthetic images must be at least 8x8");
  ids_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids_.push_back(synthetic_id(i));
}

RasterImage SyntheticCorpus::load(std::string_view id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) throw DataError("image '" + std::string(id) + "' not in synthetic corpus");
  const auto index = static_cast<std::uint64_t>(it - ids_.begin());
  return synthetic_scene(SeedHasher(seed_).add("scene").add(index).digest(), width_, height_);
}

std::string SyntheticCorpus::describe() const {
  return "synthetic " + std::to_string(ids_.size()) + " x " + std::to_string(width_) + "x" +
         std::to_string(height_) + " seed " + std::to_string(seed_);
}

RasterImage synthetic_scene(std::uint64_t seed, int width, int height) {
  if (width < 1 || height < 1) throw InvalidInput("synthetic scene needs a positive size");
  Rng rng(seed);
  const auto c0 = random_colour(rng);
  const auto c1 = random_colour(rng);
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  const double gx = std::cos(angle) / width;
  const double gy = std::sin(angle) / height;

  struct Wave {
    double fx, fy, phase, amplitude;
  };
  std::array<Wave, 3> waves{};
  for (auto& w : waves) {
    w = {(1 + rng.below(6)) * 2.0 * std::numbers::pi / width * (rng.uniform() < 0.5 ? -1 : 1),
         (1 + rng.below(6)) * 2.0 * std::numbers::pi / height, 2.0 * std::numbers::pi * rng.uniform(),
         6.0 + 14.0 * rng.uniform()};
  }

  std::vector<double> canvas(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = std::clamp(0.5 + (x - 0.5 * width) * gx + (y - 0.5 * height) * gy, 0.0, 1.0);
      double texture = 0.0;
      for (const auto& w : waves) texture += w.amplitude * std::sin(w.fx * x + w.fy * y + w.phase);
      for (int c = 0; c < 3; ++c) {
        canvas[(static_cast<std::size_t>(y) * width + x) * 3 + c] = (1 - t) * c0[c] + t * c1[c] + texture;
      }
    }
  }

  const int shapes = 4 + static_cast<int>(rng.below(6));
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = rng.uniform() < 0.5;
    const auto colour = random_colour(rng);
    const double cx = width * rng.uniform();
    const double cy = height * rng.uniform();
    const double rx = width * (0.05 + 0.25 * rng.uniform());
    const double ry = height * (0.05 + 0.25 * rng.uniform());
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + rx)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + ry)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = (x + 0.5 - cx) / rx;
        const double dy = (y + 0.5 - cy) / ry;
        const bool inside = ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) canvas[(static_cast<std::size_t>(y) * width + x) * 3 + c] = colour[c];
      }
    }
  }

  std::vector<std::uint8_t> samples(canvas.size());
  std::transform(canvas.begin(), canvas.end(), samples.begin(), [](double v) { return to_intensity(v); });
  return RasterImage(width, height, 3, std::move(samples));
}

}  // namespace simhaystack
