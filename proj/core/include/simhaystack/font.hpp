#pragma once

#include <array>
#include <cstdint>

namespace simhaystack {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 8;
inline constexpr int kGlyphAdvance = 6;

/// 5x8 column-major bitmap (bit 0 = top row) for [0-9A-Za-z]; other
/// characters render blank.
std::array<std::uint8_t, kGlyphWidth> glyph_columns(char c) noexcept;

}  // namespace simhaystack
