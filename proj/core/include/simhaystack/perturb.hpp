#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simhaystack/image.hpp"

namespace simhaystack {

enum class PerturbationFamily {
  GaussianNoise,
  SpeckleNoise,
  SaltPepper,
  GaussianFilter,
  MedianFilter,
  Jpeg,
  CropRescale,
  RotateRescale,
  Shear,
  Scale,
  Text,
  Color,
  Sharpness,
  Contrast,
  Brightness,
};

enum class PerturbationGroup { NoiseLike, Geometric, Enhancement };

inline constexpr int kPerturbationFamilyCount = 15;
inline constexpr int kSuiteSize = 58;

std::string_view to_string(PerturbationFamily family) noexcept;
PerturbationFamily parse_family(std::string_view name);
PerturbationGroup group_of(PerturbationFamily family) noexcept;
bool is_stochastic(PerturbationFamily family) noexcept;

/// The allowed parameter values of a family, in suite order.
std::span<const double> allowed_parameters(PerturbationFamily family) noexcept;

/// Canonical text of a parameter, used in file names and result tables
/// (e.g. "0.01", "7", "0.6667").
std::string parameter_label(double parameter);

struct PerturbationSpec {
  PerturbationFamily family;
  double parameter;
  std::optional<std::uint64_t> seed;  // set iff the family is stochastic

  /// `<family>_<parameter label>`
  std::string name() const;
  /// Throws InvalidInput if the parameter is outside the allowed set (unless
  /// permissive) or the seed presence does not match the family.
  void validate(bool permissive = false) const;
};

/// Seed of one (image, perturbation) pair, independent of generation order.
std::uint64_t derive_seed(std::uint64_t base_seed, PerturbationFamily family, double parameter,
                          std::string_view image_id);

/// All 58 members for one image: families in declaration order, parameters in
/// allowed order, stochastic members seeded with derive_seed.
std::vector<PerturbationSpec> suite_specs(std::string_view image_id, std::uint64_t base_seed);

struct PerturbOptions {
  bool permissive = false;
  // Text overlay styling.
  double text_height_fraction = 0.06;
  double text_band_fraction = 0.15;
};

RasterImage apply(const PerturbationSpec& spec, const RasterImage& img,
                  const PerturbOptions& options = {});

struct PerturbedImage {
  PerturbationSpec spec;
  std::string name;  // `<image_id>__<family>_<parameter>`
  RasterImage image;
};

std::vector<PerturbedImage> generate_suite(std::string_view image_id, const RasterImage& img,
                                           std::uint64_t base_seed,
                                           const PerturbOptions& options = {});

// Individual geometric/enhancement primitives, exposed for tests and tools.
RasterImage crop_rescale(const RasterImage& img, double percent);
RasterImage rotate_rescale(const RasterImage& img, double degrees);
RasterImage shear(const RasterImage& img, double degrees);
RasterImage scale(const RasterImage& img, double ratio);
RasterImage enhance(const RasterImage& img, PerturbationFamily family, double factor);
RasterImage overlay_text(const RasterImage& img, std::string_view text,
                         const PerturbOptions& options = {});

/// Width and height of the largest axis-aligned rectangle inside a w x h
/// rectangle rotated by `radians`.
std::pair<double, double> inscribed_rectangle(double w, double h, double radians);

/// Random alphanumeric string drawn from [0-9A-Za-z].
std::string random_text(std::size_t length, std::uint64_t seed);

}  // namespace simhaystack
