#include "simhaystack/hashbits.hpp"

#include <bit>
#include <charconv>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

std::uint64_t mask_for(std::size_t i) { return std::uint64_t{1} << (kWordBits - 1 - i % kWordBits); }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

void check_lengths(const BitHash& a, const BitHash& b) {
  if (a.size() != b.size()) {
    throw InvalidInput("hash length mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
}

}  // namespace

BitHash::BitHash(std::size_t length) : length_(length), words_(word_count(length), 0) {
  if (length == 0) throw InvalidInput("hash length must be at least 1");
}

BitHash BitHash::from_bits(std::span<const bool> bits) {
  BitHash h(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) h.words_[i / kWordBits] |= mask_for(i);
  }
  return h;
}

BitHash BitHash::from_bits(const std::vector<bool>& bits) {
  BitHash h(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) h.words_[i / kWordBits] |= mask_for(i);
  }
  return h;
}

bool BitHash::test(std::size_t i) const {
  if (i >= length_) throw InvalidInput("bit index out of range");
  return (words_[i / kWordBits] & mask_for(i)) != 0;
}

void BitHash::set(std::size_t i, bool value) {
  if (i >= length_) throw InvalidInput("bit index out of range");
  if (value) {
    words_[i / kWordBits] |= mask_for(i);
  } else {
    words_[i / kWordBits] &= ~mask_for(i);
  }
}

std::string BitHash::to_text() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t nibbles = (length_ + 3) / 4;
  std::string out = std::to_string(length_);
  out.push_back(':');
  out.reserve(out.size() + nibbles);
  for (std::size_t n = 0; n < nibbles; ++n) {
    const std::size_t bit = n * 4;
    const std::uint64_t word = words_[bit / kWordBits];
    const auto shift = static_cast<unsigned>(kWordBits - 4 - bit % kWordBits);
    out.push_back(kDigits[(word >> shift) & 0xF]);
  }
  return out;
}

BitHash BitHash::from_text(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw InvalidInput("hash text must look like '<length>:<hex>'");
  }
  std::size_t length = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + colon, length);
  if (ec != std::errc{} || ptr != text.data() + colon || length == 0) {
    throw InvalidInput("bad hash length in '" + std::string(text) + "'");
  }
  const std::string_view hex = text.substr(colon + 1);
  if (hex.size() != (length + 3) / 4) {
    throw InvalidInput("hash text has " + std::to_string(hex.size()) + " hex digits, expected " +
                       std::to_string((length + 3) / 4));
  }
  BitHash h(length);
  for (std::size_t n = 0; n < hex.size(); ++n) {
    const int v = hex_value(hex[n]);
    if (v < 0) throw InvalidInput("non-hex digit in hash text");
    const std::size_t bit = n * 4;
    const auto shift = static_cast<unsigned>(kWordBits - 4 - bit % kWordBits);
    h.words_[bit / kWordBits] |= static_cast<std::uint64_t>(v) << shift;
  }
  // pad bits of the last nibble must be clear
  const std::size_t pad = hex.size() * 4 - length;
  if (pad > 0 && (hex_value(hex.back()) & ((1 << pad) - 1)) != 0) {
    throw InvalidInput("hash text sets bits past its length");
  }
  return h;
}

std::size_t hamming(const BitHash& a, const BitHash& b) {
  check_lengths(a, b);
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t count = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) count += std::popcount(wa[i] ^ wb[i]);
  return count;
}

double ber(const BitHash& a, const BitHash& b) {
  return static_cast<double>(hamming(a, b)) / static_cast<double>(a.size());
}

}  // namespace simhaystack
