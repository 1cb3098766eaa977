#pragma once

#include <filesystem>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simhaystack {

struct Embedding {
  std::string model_id;
  std::vector<float> vector;

  std::size_t dim() const noexcept { return vector.size(); }
};

enum class DistanceMetric { L1, L2, Cosine, JensenShannon };

std::string_view to_string(DistanceMetric metric) noexcept;
/// Accepts L1, L2, cosine, JS / jensen-shannon (case-insensitive).
DistanceMetric parse_metric(std::string_view name);

inline constexpr double kJensenShannonEpsilon = 1e-12;

/// Throws InvalidInput on dimension or model mismatch.
double distance(DistanceMetric metric, const Embedding& a, const Embedding& b);

/// Span-level kernels, computed in double precision.
double l1_distance(std::span<const float> a, std::span<const float> b);
double l2_distance(std::span<const float> a, std::span<const float> b);
double cosine_distance(std::span<const float> a, std::span<const float> b);
double jensen_shannon_distance(std::span<const float> a, std::span<const float> b);

/// Contents of an EMB1 file.
struct EmbeddingFile {
  std::string model_id;
  std::uint32_t dim = 0;
  std::map<std::string, Embedding> records;
};

/// EMB1 (little endian): "EMB1" | u32 count | u32 dim | u16 len + model id |
/// count x (u16 len + id | dim x f32). ParseError carries the failing offset.
EmbeddingFile load_embeddings(const std::filesystem::path& path);
EmbeddingFile parse_embeddings(std::span<const std::uint8_t> bytes);

/// Writes records in id order.
std::vector<std::uint8_t> serialize_embeddings(const EmbeddingFile& file);
void save_embeddings(const EmbeddingFile& file, const std::filesystem::path& path);

}  // namespace simhaystack
