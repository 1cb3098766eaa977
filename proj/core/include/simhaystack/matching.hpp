#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "simhaystack/blockhash.hpp"
#include "simhaystack/embeddist.hpp"
#include "simhaystack/hashbits.hpp"
#include "simhaystack/image.hpp"
#include "simhaystack/keypoints.hpp"

namespace simhaystack {

enum class BackendKind {
  Ahash,
  Phash,
  Dhash,
  Whash,
  CropResistant,
  Orb,
  Embedding,
  Digest,  // exact content digest; only identical pixels collide
  Random,  // seeded random bits per image id; chance-level baseline
};

/// A configured similarity method. Text form is `<name>/<parameter>`:
/// `dhash/64`, `crop/64`, `orb/30`, `random/64`, or `<model_id>/<metric>` for
/// embeddings, e.g. `simclr_v2_resnet50_2x/JS`.
struct BackendSpec {
  BackendKind kind = BackendKind::Dhash;
  int bits = 64;
  int max_features = 30;
  int crop_min_segments_match = 1;
  std::string model_id;
  DistanceMetric metric = DistanceMetric::JensenShannon;
  std::uint64_t seed = 0;  // Random only

  std::string id() const;
  static BackendSpec parse(std::string_view text);
  bool is_block_hash() const noexcept;
};

using FingerprintValue = std::variant<BitHash, SegmentedHash, FeatureSet, Embedding>;

struct Fingerprint {
  std::string backend;
  FingerprintValue value;
};

/// Embeddings indexed by (model id, image id); lookups also accept the image
/// id without its file extension, so `img.png` records answer queries for `img`.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  /// Throws InvalidInput when a (model, id) pair is already present.
  void add(const EmbeddingFile& file);
  const Embedding* find(std::string_view model_id, std::string_view image_id) const;
  bool has_model(std::string_view model_id) const;
  std::size_t size() const noexcept { return by_id_.size(); }

 private:
  static std::string key(std::string_view model_id, std::string_view image_id);
  std::map<std::string, Embedding, std::less<>> by_id_;
  std::map<std::string, std::string, std::less<>> by_stem_;
};

/// Computes and compares fingerprints of one backend.
class Backend {
 public:
  explicit Backend(BackendSpec spec, const EmbeddingStore* embeddings = nullptr);

  const BackendSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return id_; }
  /// Embedding backends look vectors up by id and never touch pixels.
  bool needs_pixels() const noexcept { return spec_.kind != BackendKind::Embedding; }

  /// Throws MissingEmbedding for embedding backends without a vector for the id.
  Fingerprint fingerprint(std::string_view image_id, const RasterImage& img) const;
  Fingerprint fingerprint(std::string_view image_id) const;

  /// Decision distance: BER, segmented/feature cross-pair distance or the
  /// embedding metric. +infinity means "can never match". Throws InvalidInput
  /// when either fingerprint belongs to another backend.
  double distance(const Fingerprint& a, const Fingerprint& b) const;

 private:
  BackendSpec spec_;
  std::string id_;
  const EmbeddingStore* embeddings_;
};

struct DatabaseEntry {
  std::string id;
  Fingerprint fingerprint;
};

/// Homogeneous, id-sorted set of fingerprints.
class Database {
 public:
  Database() = default;
  Database(std::string backend, std::vector<DatabaseEntry> entries, double build_seconds = 0.0);

  const std::string& backend() const noexcept { return backend_; }
  const std::vector<DatabaseEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double build_seconds() const noexcept { return build_seconds_; }

 private:
  std::string backend_;
  std::vector<DatabaseEntry> entries_;
  double build_seconds_ = 0.0;
};

/// Fingerprint `images[i]` under `ids[i]` for every i and time the build.
Database build_database(const Backend& backend, const std::vector<std::string>& ids,
                        const std::vector<const RasterImage*>& images, int jobs = 1);

struct Match {
  std::string id;
  double distance;

  friend bool operator==(const Match&, const Match&) = default;
};

/// Entry at minimal distance (ties: smallest id), ignoring the threshold.
/// Empty when the database is empty or every distance is infinite.
std::optional<Match> nearest(const Backend& backend, const Fingerprint& query, const Database& db,
                             int jobs = 1);

/// nearest() if its distance is <= threshold.
std::optional<Match> best_match(const Backend& backend, const Fingerprint& query,
                                const Database& db, double threshold, int jobs = 1);

nlohmann::json fingerprint_to_json(const Fingerprint& fp);
Fingerprint fingerprint_from_json(const BackendSpec& spec, const nlohmann::json& j);

nlohmann::json database_to_json(const Database& db);
Database database_from_json(const nlohmann::json& j);
void save_database(const Database& db, const std::filesystem::path& path);
Database load_database(const std::filesystem::path& path);

}  // namespace simhaystack
