#include "simhaystack/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "simhaystack/error.hpp"
#include "simhaystack/filters.hpp"

namespace simhaystack {

namespace {

// Bresenham circle of radius 3, clockwise from 12 o'clock.
constexpr int kCircle[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},  {2, 2},  {1, 3},
                                {0, 3},  {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
constexpr int kArcLength = 9;

// Longest circular run of `sign` in state[], with the run's start.
int longest_run(const int (&state)[16], int sign, int& run_start) {
  int best = 0;
  run_start = 0;
  for (int s = 0; s < 16; ++s) {
    if (state[s] != sign || state[(s + 15) % 16] == sign) continue;  // run starts at s
    int len = 0;
    while (len < 16 && state[(s + len) % 16] == sign) ++len;
    if (len > best) {
      best = len;
      run_start = s;
    }
  }
  if (best == 0 && state[0] == sign) {  // the whole circle
    best = 16;
    run_start = 0;
  }
  return best;
}

// Half-widths of the circular orientation patch per row offset.
std::array<int, kOrbPatchRadius + 1> patch_extent() {
  std::array<int, kOrbPatchRadius + 1> umax{};
  const int vmax = static_cast<int>(std::floor(kOrbPatchRadius * std::sqrt(2.0) / 2 + 1));
  const int vmin = static_cast<int>(std::ceil(kOrbPatchRadius * std::sqrt(2.0) / 2));
  const double r2 = kOrbPatchRadius * kOrbPatchRadius;
  for (int v = 0; v <= vmax; ++v) umax[v] = static_cast<int>(std::lround(std::sqrt(r2 - v * v)));
  // keep the patch symmetric under 90 degree rotation
  for (int v = kOrbPatchRadius, v0 = 0; v >= vmin; --v) {
    while (umax[v0] == umax[v0 + 1]) ++v0;
    umax[v] = v0;
    ++v0;
  }
  return umax;
}

bool inside_border(const Keypoint& kp, int w, int h) {
  const int x = static_cast<int>(kp.x);
  const int y = static_cast<int>(kp.y);
  return x >= kOrbBorder && y >= kOrbBorder && x < w - kOrbBorder && y < h - kOrbBorder;
}

}  // namespace

std::vector<Keypoint> fast_detect(const RasterImage& img, int threshold) {
  if (threshold <= 0) throw InvalidInput("FAST threshold must be positive");
  const RasterImage gray = to_grayscale(img);
  const int w = gray.width();
  const int h = gray.height();
  if (w < 7 || h < 7) return {};

  std::vector<float> score(static_cast<std::size_t>(w) * h, 0.0f);
  int offset[16];
  for (int i = 0; i < 16; ++i) offset[i] = kCircle[i][1] * w + kCircle[i][0];
  const auto px = gray.samples();

  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const int centre = px[p];
      const int hi = centre + threshold;
      const int lo = centre - threshold;
      // a 9-arc covers at least two of the four compass points
      int brighter = 0;
      int darker = 0;
      for (int i = 0; i < 16; i += 4) {
        const int v = px[p + offset[i]];
        brighter += v > hi;
        darker += v < lo;
      }
      if (brighter < 2 && darker < 2) continue;

      int state[16];
      for (int i = 0; i < 16; ++i) {
        const int v = px[p + offset[i]];
        state[i] = v > hi ? 1 : (v < lo ? -1 : 0);
      }
      for (int sign : {1, -1}) {
        int start = 0;
        const int len = longest_run(state, sign, start);
        if (len < kArcLength) continue;
        int sum = 0;
        for (int k = 0; k < len; ++k) sum += std::abs(px[p + offset[(start + k) % 16]] - centre);
        score[p] = static_cast<float>(sum);
        break;
      }
    }
  }

  // 3x3 non-maximum suppression; equal neighbours resolve to the first in raster order
  std::vector<Keypoint> out;
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const float s = score[static_cast<std::size_t>(y) * w + x];
      if (s <= 0.0f) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const float n = score[static_cast<std::size_t>(y + dy) * w + (x + dx)];
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (n > s || (earlier && n == s)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({static_cast<float>(x), static_cast<float>(y), s, 0.0f});
    }
  }
  return out;
}

float patch_orientation(const RasterImage& gray, int x, int y) {
  static const auto umax = patch_extent();
  if (x < kOrbPatchRadius || y < kOrbPatchRadius || x >= gray.width() - kOrbPatchRadius ||
      y >= gray.height() - kOrbPatchRadius) {
    throw InvalidInput("orientation patch leaves the image");
  }
  long m01 = 0;
  long m10 = 0;
  for (int u = -kOrbPatchRadius; u <= kOrbPatchRadius; ++u) m10 += static_cast<long>(u) * gray.at(x + u, y);
  for (int v = 1; v <= kOrbPatchRadius; ++v) {
    long v_sum = 0;
    const int d = umax[v];
    for (int u = -d; u <= d; ++u) {
      const int below = gray.at(x + u, y + v);
      const int above = gray.at(x + u, y - v);
      v_sum += below - above;
      m10 += static_cast<long>(u) * (below + above);
    }
    m01 += static_cast<long>(v) * v_sum;
  }
  return static_cast<float>(std::atan2(static_cast<double>(m01), static_cast<double>(m10)));
}

BitHash brief_describe(const RasterImage& smoothed_gray, const Keypoint& kp) {
  if (smoothed_gray.channels() != 1) throw InvalidInput("brief_describe expects a gray plane");
  if (!inside_border(kp, smoothed_gray.width(), smoothed_gray.height())) {
    throw InvalidInput("keypoint too close to the border for a descriptor");
  }
  const double step = kOrbAngleStepDeg * std::numbers::pi / 180.0;
  const double angle = std::round(static_cast<double>(kp.orientation) / step) * step;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const int cx = static_cast<int>(kp.x);
  const int cy = static_cast<int>(kp.y);
  const auto sample = [&](int px, int py) {
    const int rx = static_cast<int>(std::lround(px * c - py * s));
    const int ry = static_cast<int>(std::lround(px * s + py * c));
    return smoothed_gray.at(cx + rx, cy + ry);
  };
  BitHash d(kOrbDescriptorBits);
  for (int i = 0; i < kOrbDescriptorBits; ++i) {
    const auto* t = &kOrbPattern[static_cast<std::size_t>(i) * 4];
    if (sample(t[0], t[1]) < sample(t[2], t[3])) d.set(static_cast<std::size_t>(i));
  }
  return d;
}

FeatureSet extract_features(const RasterImage& img, const OrbParams& params) {
  if (params.max_features < 1) throw InvalidInput("max_features must be >= 1");
  const RasterImage gray = to_grayscale(img);
  std::vector<Keypoint> kps = fast_detect(gray, params.fast_threshold);
  std::erase_if(kps, [&](const Keypoint& k) { return !inside_border(k, gray.width(), gray.height()); });
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (kps.size() > static_cast<std::size_t>(params.max_features)) kps.resize(params.max_features);

  FeatureSet out;
  out.max_features = params.max_features;
  if (kps.empty()) return out;
  const RasterImage smoothed = gaussian_filter(gray, params.blur_kernel);
  out.features.reserve(kps.size());
  for (Keypoint k : kps) {
    k.orientation = patch_orientation(gray, static_cast<int>(k.x), static_cast<int>(k.y));
    out.features.push_back({k, brief_describe(smoothed, k)});
  }
  return out;
}

double feature_distance(const FeatureSet& a, const FeatureSet& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& fa : a.features) {
    for (const auto& fb : b.features) best = std::min(best, ber(fa.descriptor, fb.descriptor));
  }
  return best;
}

bool image_match(const FeatureSet& a, const FeatureSet& b, double threshold) {
  return feature_distance(a, b) <= threshold;
}

}  // namespace simhaystack
