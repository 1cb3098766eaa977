#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "simhaystack/hashbits.hpp"
#include "simhaystack/image.hpp"

namespace simhaystack {

struct Keypoint {
  float x = 0;
  float y = 0;
  float response = 0;     // FAST arc score, > 0
  float orientation = 0;  // radians, intensity-centroid angle
};

struct Feature {
  Keypoint keypoint;
  BitHash descriptor{256};
};

struct OrbParams {
  int max_features = 30;
  int fast_threshold = 20;
  int blur_kernel = 5;  // smoothing before the binary tests
};

/// Descriptors of one image; at most `max_features`, highest responses first.
struct FeatureSet {
  std::vector<Feature> features;
  int max_features = 30;

  bool empty() const noexcept { return features.empty(); }
};

inline constexpr int kOrbPatchRadius = 15;
inline constexpr int kOrbDescriptorBits = 256;
/// Keypoints closer than this to the border cannot host a rotated pattern.
inline constexpr int kOrbBorder = 19;
inline constexpr double kOrbAngleStepDeg = 12.0;

/// The canonical ORB learned pattern: 256 rows of (x1, y1, x2, y2).
extern const std::array<std::int8_t, 256 * 4> kOrbPattern;

/// FAST-9/16 corners with 3x3 non-maximum suppression. The score of a corner
/// is the sum of |I(q) - I(p)| over its qualifying contiguous arc. Returned
/// in raster order with orientation left at 0. Images smaller than 7x7 give
/// an empty list.
std::vector<Keypoint> fast_detect(const RasterImage& img, int threshold = 20);

/// Intensity-centroid angle over the radius-15 circular patch.
float patch_orientation(const RasterImage& gray, int x, int y);

/// Rotated-BRIEF descriptor on an already smoothed gray plane. Orientation is
/// quantised to 12 degree steps. The keypoint must be at least kOrbBorder from
/// every edge (InvalidInput otherwise).
BitHash brief_describe(const RasterImage& smoothed_gray, const Keypoint& kp);

/// Detect, keep the top `max_features` by response (ties by (y, x)), orient
/// and describe.
FeatureSet extract_features(const RasterImage& img, const OrbParams& params = {});

/// Smallest BER over all cross pairs; +infinity when either set is empty.
double feature_distance(const FeatureSet& a, const FeatureSet& b);

/// True iff some cross pair has BER <= threshold. Empty sets never match.
bool image_match(const FeatureSet& a, const FeatureSet& b, double threshold);

}  // namespace simhaystack
