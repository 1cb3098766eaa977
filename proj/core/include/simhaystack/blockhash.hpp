#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "simhaystack/hashbits.hpp"
#include "simhaystack/image.hpp"

namespace simhaystack {

enum class HashKind { Ahash, Phash, Dhash, Whash, CropResistant };

std::string_view to_string(HashKind kind) noexcept;
HashKind parse_hash_kind(std::string_view name);

// Fixed constants of the block hashes.
inline constexpr int kPhashOversample = 4;  // s*s bits from a 4s x 4s DCT
inline constexpr int kWhashOversample = 8;  // LL band of an 8s x 8s Haar pyramid

struct CropResistantParams {
  int blur_kernel = 7;
  int max_segments = 8;
  double min_area_fraction = 0.04;
  int segmentation_size = 300;  // segmentation runs on a square working copy
  int segment_threshold = 128;  // gray level splitting "hill" from "valley"
};

struct HashAlgorithm {
  HashKind kind = HashKind::Dhash;
  int hash_length = 64;
  int crop_min_segments_match = 1;
  CropResistantParams crop;

  /// Throws InvalidInput when hash_length does not fit the algorithm's grid.
  void validate() const;
};

/// One dhash per detected region. Never empty; all members share one length.
struct SegmentedHash {
  std::vector<BitHash> segments;

  std::size_t hash_length() const { return segments.front().size(); }
  friend bool operator==(const SegmentedHash&, const SegmentedHash&) = default;
};

/// Side s of the s x s bit grid, or InvalidInput when bits is not a perfect square.
int grid_side(int bits);

BitHash ahash(const RasterImage& img, int bits = 64);
BitHash dhash(const RasterImage& img, int bits = 64);
BitHash phash(const RasterImage& img, int bits = 64);
BitHash whash(const RasterImage& img, int bits = 64);

/// Image-space bounding box of a detected segment.
struct Segment {
  int x0, y0, width, height;
  std::size_t area;  // pixels of the component in segmentation space
};

/// Connected regions used by crop_resistant_hash, largest first.
std::vector<Segment> find_segments(const RasterImage& img, const CropResistantParams& params);

SegmentedHash crop_resistant_hash(const RasterImage& img, int bits = 64,
                                  const CropResistantParams& params = {});

/// BER of the `min_matches`-th closest cross pair of segment hashes: the
/// smallest threshold at which segmented_match holds.
double segmented_distance(const SegmentedHash& a, const SegmentedHash& b, int min_matches = 1);

/// True iff at least `min_matches` cross pairs have BER <= threshold.
bool segmented_match(const SegmentedHash& a, const SegmentedHash& b, double threshold,
                     int min_matches = 1);

/// `<algo>/<bits>:<hex>`, segments joined by ','.
std::string format_hash(HashKind kind, const BitHash& hash);
std::string format_hash(const SegmentedHash& hash);

}  // namespace simhaystack
