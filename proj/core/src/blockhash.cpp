#include "simhaystack/blockhash.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "simhaystack/error.hpp"
#include "simhaystack/filters.hpp"
#include "simhaystack/transforms.hpp"

namespace simhaystack {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

RasterImage gray_resized(const RasterImage& img, int w, int h) { return resize(to_grayscale(img), w, h); }

}  // namespace

std::string_view to_string(HashKind kind) noexcept {
  switch (kind) {
    case HashKind::Ahash: return "ahash";
    case HashKind::Phash: return "phash";
    case HashKind::Dhash: return "dhash";
    case HashKind::Whash: return "whash";
    case HashKind::CropResistant: return "crop";
  }
  return "?";
}

HashKind parse_hash_kind(std::string_view name) {
  if (name == "ahash") return HashKind::Ahash;
  if (name == "phash") return HashKind::Phash;
  if (name == "dhash") return HashKind::Dhash;
  if (name == "whash") return HashKind::Whash;
  if (name == "crop" || name == "crop_resistant" || name == "crop-resistant") return HashKind::CropResistant;
  throw InvalidInput("unknown hash algorithm '" + std::string(name) + "'");
}

int grid_side(int bits) {
  if (bits < 1) throw InvalidInput("hash length must be positive");
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(bits))));
  if (s * s != bits) {
    throw InvalidInput("hash length " + std::to_string(bits) + " is not a perfect square");
  }
  return s;
}

void HashAlgorithm::validate() const {
  const int s = grid_side(hash_length);
  if (kind == HashKind::Whash && !is_power_of_two(s)) {
    throw InvalidInput("whash needs a power-of-two grid side (got " + std::to_string(s) + ")");
  }
  if (crop_min_segments_match < 1) throw InvalidInput("crop_min_segments_match must be >= 1");
}

BitHash ahash(const RasterImage& img, int bits) {
  const int s = grid_side(bits);
  const RasterImage small = gray_resized(img, s, s);
  const auto px = small.samples();
  const double mean = std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
  BitHash h(static_cast<std::size_t>(bits));
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (px[i] > mean) h.set(i);
  }
  return h;
}

BitHash dhash(const RasterImage& img, int bits) {
  const int s = grid_side(bits);
  const RasterImage small = gray_resized(img, s + 1, s);
  BitHash h(static_cast<std::size_t>(bits));
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) {
      if (small.at(c, r) < small.at(c + 1, r)) h.set(static_cast<std::size_t>(r) * s + c);
    }
  }
  return h;
}

BitHash phash(const RasterImage& img, int bits) {
  const int s = grid_side(bits);
  if (s < 2) throw InvalidInput("phash needs at least 4 bits");
  const int side = kPhashOversample * s;
  const FloatPlane coeffs = dct2(FloatPlane::from_gray(gray_resized(img, side, side)));
  std::vector<double> low;
  low.reserve(static_cast<std::size_t>(bits));
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) low.push_back(coeffs.at(c, r));
  }
  // the DC term is hashed but kept out of the median
  const double med = median_of(std::vector<double>(low.begin() + 1, low.end()));
  BitHash h(static_cast<std::size_t>(bits));
  for (std::size_t i = 0; i < low.size(); ++i) {
    if (low[i] > med) h.set(i);
  }
  return h;
}

BitHash whash(const RasterImage& img, int bits) {
  const int s = grid_side(bits);
  if (!is_power_of_two(s)) {
    throw InvalidInput("whash needs a power-of-two grid side (got " + std::to_string(s) + ")");
  }
  const int side = kWhashOversample * s;
  const int levels = std::countr_zero(static_cast<unsigned>(kWhashOversample));
  const FloatPlane coeffs = haar_dwt(FloatPlane::from_gray(gray_resized(img, side, side)), levels);
  std::vector<double> ll;
  ll.reserve(static_cast<std::size_t>(bits));
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) ll.push_back(coeffs.at(c, r));
  }
  const double med = median_of(ll);
  BitHash h(static_cast<std::size_t>(bits));
  for (std::size_t i = 0; i < ll.size(); ++i) {
    if (ll[i] > med) h.set(i);
  }
  return h;
}

std::vector<Segment> find_segments(const RasterImage& img, const CropResistantParams& params) {
  const int n = params.segmentation_size;
  const RasterImage work = gaussian_filter(gray_resized(img, n, n), params.blur_kernel);
  const auto px = work.samples();
  std::vector<int> label(px.size(), -1);
  struct Component {
    int x0, y0, x1, y1;
    std::size_t area;
  };
  std::vector<Component> comps;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(px.size()); ++start) {
    if (label[start] >= 0) continue;
    const bool hill = px[start] > params.segment_threshold;
    const int id = static_cast<int>(comps.size());
    Component comp{n, n, -1, -1, 0};
    label[start] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int x = p % n;
      const int y = p / n;
      comp.x0 = std::min(comp.x0, x);
      comp.y0 = std::min(comp.y0, y);
      comp.x1 = std::max(comp.x1, x);
      comp.y1 = std::max(comp.y1, y);
      ++comp.area;
      const int nbr[4] = {x > 0 ? p - 1 : -1, x + 1 < n ? p + 1 : -1, y > 0 ? p - n : -1,
                          y + 1 < n ? p + n : -1};
      for (int q : nbr) {
        if (q >= 0 && label[q] < 0 && (px[q] > params.segment_threshold) == hill) {
          label[q] = id;
          stack.push_back(q);
        }
      }
    }
    comps.push_back(comp);
  }

  const auto min_area = static_cast<std::size_t>(std::ceil(params.min_area_fraction * n * n));
  std::vector<Component> kept;
  for (const auto& c : comps) {
    if (c.area >= min_area) kept.push_back(c);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Component& a, const Component& b) {
    if (a.area != b.area) return a.area > b.area;
    if (a.y0 != b.y0) return a.y0 < b.y0;
    return a.x0 < b.x0;
  });
  if (kept.size() > static_cast<std::size_t>(params.max_segments)) kept.resize(params.max_segments);

  std::vector<Segment> out;
  const double sx = static_cast<double>(img.width()) / n;
  const double sy = static_cast<double>(img.height()) / n;
  for (const auto& c : kept) {
    const int x0 = std::clamp(static_cast<int>(std::floor(c.x0 * sx)), 0, img.width() - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(c.y0 * sy)), 0, img.height() - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil((c.x1 + 1) * sx)), x0 + 1, img.width());
    const int y1 = std::clamp(static_cast<int>(std::ceil((c.y1 + 1) * sy)), y0 + 1, img.height());
    out.push_back({x0, y0, x1 - x0, y1 - y0, c.area});
  }
  if (out.empty()) {
    out.push_back({0, 0, img.width(), img.height(), static_cast<std::size_t>(n) * n});
  }
  return out;
}

SegmentedHash crop_resistant_hash(const RasterImage& img, int bits, const CropResistantParams& params) {
  grid_side(bits);
  SegmentedHash out;
  for (const Segment& s : find_segments(img, params)) {
    if (s.x0 == 0 && s.y0 == 0 && s.width == img.width() && s.height == img.height()) {
      out.segments.push_back(dhash(img, bits));
    } else {
      out.segments.push_back(dhash(crop(img, s.x0, s.y0, s.width, s.height), bits));
    }
  }
  return out;
}

double segmented_distance(const SegmentedHash& a, const SegmentedHash& b, int min_matches) {
  if (a.segments.empty() || b.segments.empty()) return std::numeric_limits<double>::infinity();
  if (min_matches < 1) throw InvalidInput("min_matches must be >= 1");
  std::vector<double> d;
  d.reserve(a.segments.size() * b.segments.size());
  for (const auto& ha : a.segments) {
    for (const auto& hb : b.segments) d.push_back(ber(ha, hb));
  }
  if (static_cast<std::size_t>(min_matches) > d.size()) return std::numeric_limits<double>::infinity();
  std::nth_element(d.begin(), d.begin() + (min_matches - 1), d.end());
  return d[static_cast<std::size_t>(min_matches - 1)];
}

bool segmented_match(const SegmentedHash& a, const SegmentedHash& b, double threshold, int min_matches) {
  return segmented_distance(a, b, min_matches) <= threshold;
}

std::string format_hash(HashKind kind, const BitHash& hash) {
  return std::string(to_string(kind)) + "/" + hash.to_text();
}

std::string format_hash(const SegmentedHash& hash) {
  std::string out = "crop/" + std::to_string(hash.hash_length()) + ":";
  for (std::size_t i = 0; i < hash.segments.size(); ++i) {
    const std::string text = hash.segments[i].to_text();
    if (i > 0) out.push_back(',');
    out += text.substr(text.find(':') + 1);
  }
  return out;
}

}  // namespace simhaystack
