#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "simhaystack/image.hpp"

namespace simhaystack {

/// Read-only, id-addressed image collection.
class ImageCorpus {
 public:
  virtual ~ImageCorpus() = default;
  /// Sorted, unique ids.
  virtual const std::vector<std::string>& ids() const = 0;
  /// Throws DataError naming the failing path.
  virtual RasterImage load(std::string_view id) const = 0;
  virtual std::string describe() const = 0;
};

/// PNG/JPEG files found recursively under a root; id = file name. Duplicate
/// file names in different subdirectories are rejected.
class DirectoryCorpus final : public ImageCorpus {
 public:
  explicit DirectoryCorpus(std::filesystem::path root);

  const std::vector<std::string>& ids() const override { return ids_; }
  RasterImage load(std::string_view id) const override;
  std::string describe() const override;
  std::filesystem::path path_of(std::string_view id) const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> ids_;
  std::vector<std::filesystem::path> paths_;
};

/// Procedural scenes (gradient backdrop, random shapes, band-limited
/// texture). Image i is a pure function of (seed, i, width, height).
class SyntheticCorpus final : public ImageCorpus {
 public:
  SyntheticCorpus(std::size_t count, int width, int height, std::uint64_t seed);

  const std::vector<std::string>& ids() const override { return ids_; }
  RasterImage load(std::string_view id) const override;
  std::string describe() const override;

 private:
  int width_;
  int height_;
  std::uint64_t seed_;
  std::vector<std::string> ids_;
};

RasterImage synthetic_scene(std::uint64_t seed, int width, int height);

bool is_image_file(const std::filesystem::path& path);

}  // namespace simhaystack
