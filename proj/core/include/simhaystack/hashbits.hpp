#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simhaystack {

/// Fixed-length binary fingerprint.
///
/// Bits are packed most-significant-first into 64-bit words: bit 0 is the
/// top bit of word 0. Pad bits past `size()` are always zero, so popcount
/// over the xor of two hashes is exactly their Hamming distance.
class BitHash {
 public:
  /// All-zero hash of `length` bits. Throws InvalidInput if length == 0.
  explicit BitHash(std::size_t length);

  /// Build from booleans in row-major grid order (bit 0 = top-left).
  static BitHash from_bits(std::span<const bool> bits);
  static BitHash from_bits(const std::vector<bool>& bits);

  std::size_t size() const noexcept { return length_; }
  bool test(std::size_t i) const;
  void set(std::size_t i, bool value = true);
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// Canonical text form `<length>:<lowercase hex, msb first>`.
  std::string to_text() const;
  /// Inverse of to_text. Throws InvalidInput on malformed text or non-zero pad bits.
  static BitHash from_text(std::string_view text);

  friend bool operator==(const BitHash&, const BitHash&) = default;

 private:
  std::size_t length_;
  std::vector<std::uint64_t> words_;
};

/// Number of differing bit positions. Throws InvalidInput on length mismatch.
std::size_t hamming(const BitHash& a, const BitHash& b);

/// Bit error rate: hamming(a, b) / length, in [0, 1].
double ber(const BitHash& a, const BitHash& b);

}  // namespace simhaystack
