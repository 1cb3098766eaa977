#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "simhaystack/image.hpp"

namespace simhaystack {

/// Decode a PNG or JPEG file (detected from its signature). Palette, 16-bit
/// and alpha PNGs are reduced to 8-bit gray or RGB. Throws DataError.
RasterImage read_image(const std::filesystem::path& path);
RasterImage decode_image(std::span<const std::uint8_t> bytes);

void write_png(const RasterImage& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const RasterImage& img);

std::vector<std::uint8_t> encode_jpeg(const RasterImage& img, int quality);
RasterImage decode_jpeg(std::span<const std::uint8_t> bytes);

}  // namespace simhaystack
