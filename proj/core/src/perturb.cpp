#include "simhaystack/perturb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "simhaystack/error.hpp"
#include "simhaystack/filters.hpp"
#include "simhaystack/font.hpp"
#include "simhaystack/image_io.hpp"
#include "simhaystack/rng.hpp"

namespace simhaystack {

namespace {

constexpr std::array<double, 3> kNoiseVariance = {0.01, 0.02, 0.05};
constexpr std::array<double, 3> kSaltPepperAmount = {0.05, 0.1, 0.15};
constexpr std::array<double, 3> kKernelSize = {3, 5, 7};
constexpr std::array<double, 3> kJpegQuality = {10, 50, 90};
constexpr std::array<double, 5> kCropPercent = {5, 10, 20, 40, 60};
constexpr std::array<double, 5> kRotationDegrees = {5, 10, 20, 40, 60};
constexpr std::array<double, 5> kShearDegrees = {1, 2, 5, 10, 20};
constexpr std::array<double, 4> kScaleRatio = {0.4, 0.8, 1.2, 1.6};
constexpr std::array<double, 5> kTextLength = {10, 20, 30, 40, 50};
constexpr std::array<double, 4> kEnhanceFactor = {1.0 / 2.0, 2.0 / 3.0, 3.0 / 2.0, 2.0};

constexpr std::array<PerturbationFamily, kPerturbationFamilyCount> kAllFamilies = {
    PerturbationFamily::GaussianNoise, PerturbationFamily::SpeckleNoise, PerturbationFamily::SaltPepper,
    PerturbationFamily::GaussianFilter, PerturbationFamily::MedianFilter, PerturbationFamily::Jpeg,
    PerturbationFamily::CropRescale,   PerturbationFamily::RotateRescale, PerturbationFamily::Shear,
    PerturbationFamily::Scale,         PerturbationFamily::Text,          PerturbationFamily::Color,
    PerturbationFamily::Sharpness,     PerturbationFamily::Contrast,      PerturbationFamily::Brightness,
};

constexpr std::string_view kAlphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

bool same_parameter(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

int as_int(double v) { return static_cast<int>(std::lround(v)); }

// Bilinear lookup with black outside the image.
double sample_bilinear(const RasterImage& img, double fx, double fy, int ch) {
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0;
  const double ay = fy - y0;
  const auto at = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return 0.0;
    return img.at(x, y, ch);
  };
  return (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x0 + 1, y0)) +
         ay * ((1 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1));
}

// Inverse-mapped warp onto a canvas of the same size.
template <typename InverseMap>
RasterImage warp(const RasterImage& img, InverseMap&& inverse) {
  RasterImage out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto [sx, sy] = inverse(static_cast<double>(x), static_cast<double>(y));
      for (int ch = 0; ch < img.channels(); ++ch) out.at(x, y, ch) = to_intensity(sample_bilinear(img, sx, sy, ch));
    }
  }
  return out;
}

RasterImage additive_noise(const RasterImage& img, double variance, std::uint64_t seed, bool multiplicative) {
  Rng rng(seed);
  const double sigma = std::sqrt(variance);
  RasterImage out = img;
  for (auto& s : out.samples()) {
    const double x = s / 255.0;
    const double n = sigma * rng.normal();
    s = to_intensity(255.0 * (multiplicative ? x * (1.0 + n) : x + n));
  }
  return out;
}

RasterImage salt_pepper(const RasterImage& img, double amount, std::uint64_t seed) {
  Rng rng(seed);
  RasterImage out = img;
  const int c = img.channels();
  auto s = out.samples();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    if (rng.uniform() >= amount) continue;
    const std::uint8_t v = rng.uniform() < 0.5 ? 0 : 255;
    for (int ch = 0; ch < c; ++ch) s[p * c + ch] = v;
  }
  return out;
}

}  // namespace

std::string_view to_string(PerturbationFamily family) noexcept {
  switch (family) {
    case PerturbationFamily::GaussianNoise: return "gaussian_noise";
    case PerturbationFamily::SpeckleNoise: return "speckle_noise";
    case PerturbationFamily::SaltPepper: return "salt_pepper";
    case PerturbationFamily::GaussianFilter: return "gaussian_filter";
    case PerturbationFamily::MedianFilter: return "median_filter";
    case PerturbationFamily::Jpeg: return "jpeg";
    case PerturbationFamily::CropRescale: return "crop_rescale";
    case PerturbationFamily::RotateRescale: return "rotate_rescale";
    case PerturbationFamily::Shear: return "shear";
    case PerturbationFamily::Scale: return "scale";
    case PerturbationFamily::Text: return "text";
    case PerturbationFamily::Color: return "color";
    case PerturbationFamily::Sharpness: return "sharpness";
    case PerturbationFamily::Contrast: return "contrast";
    case PerturbationFamily::Brightness: return "brightness";
  }
  return "?";
}

PerturbationFamily parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw InvalidInput("unknown perturbation family '" + std::string(name) + "'");
}

PerturbationGroup group_of(PerturbationFamily family) noexcept {
  switch (family) {
    case PerturbationFamily::GaussianNoise:
    case PerturbationFamily::SpeckleNoise:
    case PerturbationFamily::SaltPepper:
    case PerturbationFamily::GaussianFilter:
    case PerturbationFamily::MedianFilter:
    case PerturbationFamily::Jpeg: return PerturbationGroup::NoiseLike;
    case PerturbationFamily::CropRescale:
    case PerturbationFamily::RotateRescale:
    case PerturbationFamily::Shear:
    case PerturbationFamily::Scale:
    case PerturbationFamily::Text: return PerturbationGroup::Geometric;
    default: return PerturbationGroup::Enhancement;
  }
}

bool is_stochastic(PerturbationFamily family) noexcept {
  return family == PerturbationFamily::GaussianNoise || family == PerturbationFamily::SpeckleNoise ||
         family == PerturbationFamily::SaltPepper || family == PerturbationFamily::Text;
}

std::span<const double> allowed_parameters(PerturbationFamily family) noexcept {
  switch (family) {
    case PerturbationFamily::GaussianNoise:
    case PerturbationFamily::SpeckleNoise: return kNoiseVariance;
    case PerturbationFamily::SaltPepper: return kSaltPepperAmount;
    case PerturbationFamily::GaussianFilter:
    case PerturbationFamily::MedianFilter: return kKernelSize;
    case PerturbationFamily::Jpeg: return kJpegQuality;
    case PerturbationFamily::CropRescale: return kCropPercent;
    case PerturbationFamily::RotateRescale: return kRotationDegrees;
    case PerturbationFamily::Shear: return kShearDegrees;
    case PerturbationFamily::Scale: return kScaleRatio;
    case PerturbationFamily::Text: return kTextLength;
    default: return kEnhanceFactor;
  }
}

std::string parameter_label(double parameter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", parameter);
  return buf;
}

std::string PerturbationSpec::name() const {
  return std::string(to_string(family)) + "_" + parameter_label(parameter);
}

void PerturbationSpec::validate(bool permissive) const {
  if (seed.has_value() != is_stochastic(family)) {
    throw InvalidInput(std::string(to_string(family)) +
                       (is_stochastic(family) ? " needs a seed" : " takes no seed"));
  }
  if (!std::isfinite(parameter)) throw InvalidInput("perturbation parameter must be finite");
  if (!permissive) {
    const auto allowed = allowed_parameters(family);
    if (std::none_of(allowed.begin(), allowed.end(), [&](double a) { return same_parameter(parameter, a); })) {
      throw InvalidInput(std::string(to_string(family)) + " does not take parameter " + parameter_label(parameter) +
                         " (enable permissive mode to explore outside the suite)");
    }
    return;
  }
  bool ok = true;
  switch (family) {
    case PerturbationFamily::GaussianNoise:
    case PerturbationFamily::SpeckleNoise: ok = parameter >= 0; break;
    case PerturbationFamily::SaltPepper: ok = parameter >= 0 && parameter <= 1; break;
    case PerturbationFamily::GaussianFilter:
    case PerturbationFamily::MedianFilter: ok = as_int(parameter) == 3 || as_int(parameter) == 5 || as_int(parameter) == 7; break;
    case PerturbationFamily::Jpeg: ok = parameter >= 1 && parameter <= 100; break;
    case PerturbationFamily::CropRescale: ok = parameter >= 0 && parameter < 100; break;
    case PerturbationFamily::RotateRescale:
    case PerturbationFamily::Shear: ok = std::abs(parameter) < 90; break;
    case PerturbationFamily::Scale: ok = parameter > 0 && parameter <= 16; break;
    case PerturbationFamily::Text: ok = parameter >= 0 && parameter <= 10000; break;
    default: ok = parameter >= 0; break;
  }
  if (!ok) throw InvalidInput(std::string(to_string(family)) + " parameter out of range: " + parameter_label(parameter));
}

std::uint64_t derive_seed(std::uint64_t base_seed, PerturbationFamily family, double parameter,
                          std::string_view image_id) {
  return SeedHasher(base_seed).add(to_string(family)).add(parameter_label(parameter)).add(image_id).digest();
}

std::vector<PerturbationSpec> suite_specs(std::string_view image_id, std::uint64_t base_seed) {
  std::vector<PerturbationSpec> specs;
  specs.reserve(kSuiteSize);
  for (auto family : kAllFamilies) {
    for (double p : allowed_parameters(family)) {
      std::optional<std::uint64_t> seed;
      if (is_stochastic(family)) seed = derive_seed(base_seed, family, p, image_id);
      specs.push_back({family, p, seed});
    }
  }
  return specs;
}

std::pair<double, double> inscribed_rectangle(double w, double h, double radians) {
  if (w <= 0 || h <= 0) return {0, 0};
  const bool width_is_longer = w >= h;
  const double long_side = width_is_longer ? w : h;
  const double short_side = width_is_longer ? h : w;
  const double sin_a = std::abs(std::sin(radians));
  const double cos_a = std::abs(std::cos(radians));
  if (sin_a < 1e-12) return {w, h};
  if (short_side <= 2.0 * sin_a * cos_a * long_side || std::abs(sin_a - cos_a) < 1e-10) {
    // half-constrained: two corners touch the longer side
    const double x = 0.5 * short_side;
    return width_is_longer ? std::pair{x / sin_a, x / cos_a} : std::pair{x / cos_a, x / sin_a};
  }
  const double cos_2a = cos_a * cos_a - sin_a * sin_a;
  return {(w * cos_a - h * sin_a) / cos_2a, (h * cos_a - w * sin_a) / cos_2a};
}

RasterImage crop_rescale(const RasterImage& img, double percent) {
  const double keep = 1.0 - percent / 100.0;
  const int cw = std::max(1, as_int(img.width() * keep));
  const int ch = std::max(1, as_int(img.height() * keep));
  const RasterImage inner = crop(img, (img.width() - cw) / 2, (img.height() - ch) / 2, cw, ch);
  return resize(inner, img.width(), img.height());
}

RasterImage rotate_rescale(const RasterImage& img, double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double cx = (img.width() - 1) * 0.5;
  const double cy = (img.height() - 1) * 0.5;
  const RasterImage rotated = warp(img, [&](double x, double y) {
    const double dx = x - cx;
    const double dy = y - cy;
    return std::pair{c * dx + s * dy + cx, -s * dx + c * dy + cy};
  });
  const auto [rw, rh] = inscribed_rectangle(img.width(), img.height(), a);
  const int cw = std::clamp(static_cast<int>(std::floor(rw)), 1, img.width());
  const int ch = std::clamp(static_cast<int>(std::floor(rh)), 1, img.height());
  const RasterImage inner = crop(rotated, (img.width() - cw) / 2, (img.height() - ch) / 2, cw, ch);
  return resize(inner, img.width(), img.height());
}

RasterImage shear(const RasterImage& img, double degrees) {
  const double t = std::tan(degrees * std::numbers::pi / 180.0);
  const double cy = (img.height() - 1) * 0.5;
  return warp(img, [&](double x, double y) { return std::pair{x - t * (y - cy), y}; });
}

RasterImage scale(const RasterImage& img, double ratio) {
  return resize(img, std::max(1, as_int(img.width() * ratio)), std::max(1, as_int(img.height() * ratio)));
}

RasterImage enhance(const RasterImage& img, PerturbationFamily family, double factor) {
  RasterImage degenerate;
  switch (family) {
    case PerturbationFamily::Color: degenerate = img.channels() == 3 ? to_rgb(to_grayscale(img)) : img; break;
    case PerturbationFamily::Sharpness: degenerate = gaussian_filter(img, 5); break;
    case PerturbationFamily::Contrast: {
      const RasterImage gray = to_grayscale(img);
      double sum = 0.0;
      for (auto v : gray.samples()) sum += v;
      degenerate = RasterImage(img.width(), img.height(), img.channels(),
                               to_intensity(sum / static_cast<double>(gray.samples().size())));
      break;
    }
    case PerturbationFamily::Brightness: degenerate = RasterImage(img.width(), img.height(), img.channels(), 0); break;
    default: throw InvalidInput(std::string(to_string(family)) + " is not an enhancement family");
  }
  RasterImage out(img.width(), img.height(), img.channels());
  const auto src = img.samples();
  const auto deg = degenerate.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double d = deg[i];
    dst[i] = to_intensity(d + factor * (src[i] - d));
  }
  return out;
}

std::string random_text(std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::string s(length, ' ');
  for (auto& ch : s) ch = kAlphabet[rng.below(kAlphabet.size())];
  return s;
}

RasterImage overlay_text(const RasterImage& img, std::string_view text, const PerturbOptions& options) {
  RasterImage out = img;
  if (text.empty()) return out;
  const int w = img.width();
  const int h = img.height();
  const int k = std::max(1, as_int(options.text_height_fraction * h / kGlyphHeight));
  const int advance = kGlyphAdvance * k;
  const int per_line = std::max(1, (w - 2 * k) / advance);
  std::vector<std::string_view> lines;
  for (std::size_t i = 0; i < text.size(); i += per_line) lines.push_back(text.substr(i, per_line));

  const int line_height = (kGlyphHeight + 2) * k;
  const double band_centre = h - 0.5 * options.text_band_fraction * h;
  const int block_height = line_height * static_cast<int>(lines.size());
  // keep long texts inside the frame; they grow upwards out of the band
  const int top = std::max(0, std::min(h - block_height, as_int(band_centre - 0.5 * block_height)));

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_width = static_cast<int>(lines[li].size()) * advance - k;
    const int left = (w - line_width) / 2;
    const int y0 = top + static_cast<int>(li) * line_height + k;
    for (std::size_t ci = 0; ci < lines[li].size(); ++ci) {
      const auto cols = glyph_columns(lines[li][ci]);
      for (int gx = 0; gx < kGlyphWidth; ++gx) {
        for (int gy = 0; gy < kGlyphHeight; ++gy) {
          if (!((cols[gx] >> gy) & 1)) continue;
          for (int sy = 0; sy < k; ++sy) {
            for (int sx = 0; sx < k; ++sx) {
              const int x = left + static_cast<int>(ci) * advance + gx * k + sx;
              const int y = y0 + gy * k + sy;
              if (x >= 0 && y >= 0 && x < w && y < h) mask[static_cast<std::size_t>(y) * w + x] = 1;
            }
          }
        }
      }
    }
  }
  // 1-px black outline around the white glyphs
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      std::uint8_t value;
      if (mask[p]) {
        value = 255;
      } else {
        bool edge = false;
        for (int dy = -1; dy <= 1 && !edge; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            const int yy = y + dy;
            if (xx >= 0 && yy >= 0 && xx < w && yy < h && mask[static_cast<std::size_t>(yy) * w + xx]) {
              edge = true;
              break;
            }
          }
        }
        if (!edge) continue;
        value = 0;
      }
      for (int ch = 0; ch < img.channels(); ++ch) out.at(x, y, ch) = value;
    }
  }
  return out;
}

RasterImage apply(const PerturbationSpec& spec, const RasterImage& img, const PerturbOptions& options) {
  spec.validate(options.permissive);
  if (img.empty()) throw InvalidInput("cannot perturb an empty image");
  const double p = spec.parameter;
  switch (spec.family) {
    case PerturbationFamily::GaussianNoise: return additive_noise(img, p, *spec.seed, false);
    case PerturbationFamily::SpeckleNoise: return additive_noise(img, p, *spec.seed, true);
    case PerturbationFamily::SaltPepper: return salt_pepper(img, p, *spec.seed);
    case PerturbationFamily::GaussianFilter: return gaussian_filter(img, as_int(p));
    case PerturbationFamily::MedianFilter: return median_filter(img, as_int(p));
    case PerturbationFamily::Jpeg: return decode_jpeg(encode_jpeg(img, as_int(p)));
    case PerturbationFamily::CropRescale: return crop_rescale(img, p);
    case PerturbationFamily::RotateRescale: return rotate_rescale(img, p);
    case PerturbationFamily::Shear: return shear(img, p);
    case PerturbationFamily::Scale: return scale(img, p);
    case PerturbationFamily::Text: return overlay_text(img, random_text(static_cast<std::size_t>(as_int(p)), *spec.seed), options);
    case PerturbationFamily::Color:
    case PerturbationFamily::Sharpness:
    case PerturbationFamily::Contrast:
    case PerturbationFamily::Brightness: return enhance(img, spec.family, p);
  }
  throw InvalidInput("unknown perturbation family");
}

std::vector<PerturbedImage> generate_suite(std::string_view image_id, const RasterImage& img,
                                           std::uint64_t base_seed, const PerturbOptions& options) {
  std::vector<PerturbedImage> out;
  out.reserve(kSuiteSize);
  for (const auto& spec : suite_specs(image_id, base_seed)) {
    out.push_back({spec, std::string(image_id) + "__" + spec.name(), apply(spec, img, options)});
  }
  return out;
}

}  // namespace simhaystack
