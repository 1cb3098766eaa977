#include "simhaystack/matching.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "simhaystack/error.hpp"
#include "simhaystack/parallel.hpp"
#include "simhaystack/rng.hpp"

namespace simhaystack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::string_view kCropPrefix = "crop-k";

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int parse_positive_int(std::string_view text, std::string_view what) {
  int value = 0;
  if (text.empty() || text.size() > 6) throw InvalidInput("bad " + std::string(what) + " '" + std::string(text) + "'");
  for (char c : text) {
    if (c < '0' || c > '9') throw InvalidInput("bad " + std::string(what) + " '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  if (value <= 0) throw InvalidInput(std::string(what) + " must be positive");
  return value;
}

std::string_view strip_image_extension(std::string_view id) {
  const auto dot = id.rfind('.');
  if (dot == std::string_view::npos) return id;
  const std::string ext = lower(id.substr(dot));
  if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") return id.substr(0, dot);
  return id;
}

BitHash random_bits(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  BitHash h(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng.next();
    if ((word >> (63 - i % 64)) & 1) h.set(i);
  }
  return h;
}

std::uint64_t content_digest(const RasterImage& img) {
  const auto s = img.samples();
  return SeedHasher(0)
      .add(static_cast<std::uint64_t>(img.width()))
      .add(static_cast<std::uint64_t>(img.height()))
      .add(static_cast<std::uint64_t>(img.channels()))
      .add(std::string_view(reinterpret_cast<const char*>(s.data()), s.size()))
      .digest();
}

template <typename T>
const T& value_as(const Fingerprint& fp) {
  const T* v = std::get_if<T>(&fp.value);
  if (!v) throw InvalidInput("fingerprint of backend '" + fp.backend + "' has an unexpected value type");
  return *v;
}

}  // namespace

std::string BackendSpec::id() const {
  switch (kind) {
    case BackendKind::Ahash: return "ahash/" + std::to_string(bits);
    case BackendKind::Phash: return "phash/" + std::to_string(bits);
    case BackendKind::Dhash: return "dhash/" + std::to_string(bits);
    case BackendKind::Whash: return "whash/" + std::to_string(bits);
    case BackendKind::CropResistant:
      if (crop_min_segments_match == 1) return "crop/" + std::to_string(bits);
      return std::string(kCropPrefix) + std::to_string(crop_min_segments_match) + "/" + std::to_string(bits);
    case BackendKind::Orb: return "orb/" + std::to_string(max_features);
    case BackendKind::Digest: return "digest/" + std::to_string(bits);
    case BackendKind::Random: return "random/" + std::to_string(bits);
    case BackendKind::Embedding: return model_id + "/" + std::string(to_string(metric));
  }
  return "?";
}

BackendSpec BackendSpec::parse(std::string_view text) {
  const auto slash = text.rfind('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == text.size()) {
    throw InvalidInput("backend '" + std::string(text) + "' is not of the form <name>/<parameter>");
  }
  const std::string name = lower(text.substr(0, slash));
  const std::string_view param = text.substr(slash + 1);
  BackendSpec spec;
  if (name == "ahash" || name == "phash" || name == "dhash" || name == "whash" || name == "crop" ||
      name.starts_with(kCropPrefix)) {
    HashAlgorithm algo;
    if (name == "ahash") spec.kind = BackendKind::Ahash, algo.kind = HashKind::Ahash;
    else if (name == "phash") spec.kind = BackendKind::Phash, algo.kind = HashKind::Phash;
    else if (name == "dhash") spec.kind = BackendKind::Dhash, algo.kind = HashKind::Dhash;
    else if (name == "whash") spec.kind = BackendKind::Whash, algo.kind = HashKind::Whash;
    else {
      spec.kind = BackendKind::CropResistant;
      algo.kind = HashKind::CropResistant;
      if (name != "crop") {
        spec.crop_min_segments_match = parse_positive_int(std::string_view(name).substr(kCropPrefix.size()),
                                                          "crop segment count");
      }
    }
    spec.bits = parse_positive_int(param, "hash length");
    algo.hash_length = spec.bits;
    algo.crop_min_segments_match = spec.crop_min_segments_match;
    algo.validate();
    return spec;
  }
  if (name == "orb") {
    spec.kind = BackendKind::Orb;
    spec.max_features = parse_positive_int(param, "feature count");
    return spec;
  }
  if (name == "digest" || name == "random") {
    spec.kind = name == "digest" ? BackendKind::Digest : BackendKind::Random;
    spec.bits = parse_positive_int(param, "hash length");
    return spec;
  }
  spec.kind = BackendKind::Embedding;
  spec.model_id = std::string(text.substr(0, slash));
  spec.metric = parse_metric(param);
  return spec;
}

bool BackendSpec::is_block_hash() const noexcept {
  return kind == BackendKind::Ahash || kind == BackendKind::Phash || kind == BackendKind::Dhash ||
         kind == BackendKind::Whash || kind == BackendKind::CropResistant;
}

std::string EmbeddingStore::key(std::string_view model_id, std::string_view image_id) {
  std::string k(model_id);
  k.push_back('\0');
  k.append(image_id);
  return k;
}

void EmbeddingStore::add(const EmbeddingFile& file) {
  for (const auto& [id, emb] : file.records) {
    const std::string k = key(file.model_id, id);
    if (!by_id_.emplace(k, emb).second) {
      throw InvalidInput("embedding for '" + id + "' of model '" + file.model_id + "' loaded twice");
    }
    const std::string_view stem = strip_image_extension(id);
    if (stem.size() != id.size()) by_stem_.emplace(key(file.model_id, stem), k);
  }
}

const Embedding* EmbeddingStore::find(std::string_view model_id, std::string_view image_id) const {
  if (auto it = by_id_.find(key(model_id, image_id)); it != by_id_.end()) return &it->second;
  if (auto it = by_stem_.find(key(model_id, image_id)); it != by_stem_.end()) return &by_id_.find(it->second)->second;
  const std::string_view stem = strip_image_extension(image_id);
  if (stem.size() != image_id.size()) {
    if (auto it = by_id_.find(key(model_id, stem)); it != by_id_.end()) return &it->second;
  }
  return nullptr;
}

bool EmbeddingStore::has_model(std::string_view model_id) const {
  const std::string prefix = key(model_id, "");
  auto it = by_id_.lower_bound(prefix);
  return it != by_id_.end() && it->first.starts_with(prefix);
}

Backend::Backend(BackendSpec spec, const EmbeddingStore* embeddings)
    : spec_(std::move(spec)), id_(spec_.id()), embeddings_(embeddings) {}

Fingerprint Backend::fingerprint(std::string_view image_id, const RasterImage& img) const {
  Fingerprint fp{id_, BitHash(1)};
  switch (spec_.kind) {
    case BackendKind::Ahash: fp.value = ahash(img, spec_.bits); break;
    case BackendKind::Phash: fp.value = phash(img, spec_.bits); break;
    case BackendKind::Dhash: fp.value = dhash(img, spec_.bits); break;
    case BackendKind::Whash: fp.value = whash(img, spec_.bits); break;
    case BackendKind::CropResistant: fp.value = crop_resistant_hash(img, spec_.bits); break;
    case BackendKind::Orb: {
      OrbParams params;
      params.max_features = spec_.max_features;
      fp.value = extract_features(img, params);
      break;
    }
    case BackendKind::Digest:
      fp.value = random_bits(static_cast<std::size_t>(spec_.bits), content_digest(img));
      break;
    case BackendKind::Random: return fingerprint(image_id);
    case BackendKind::Embedding: return fingerprint(image_id);
  }
  return fp;
}

Fingerprint Backend::fingerprint(std::string_view image_id) const {
  if (spec_.kind == BackendKind::Random) {
    return {id_, random_bits(static_cast<std::size_t>(spec_.bits), SeedHasher(spec_.seed).add(image_id).digest())};
  }
  if (spec_.kind != BackendKind::Embedding) {
    throw InvalidInput("backend " + id_ + " needs pixels to fingerprint '" + std::string(image_id) + "'");
  }
  const Embedding* e = embeddings_ ? embeddings_->find(spec_.model_id, image_id) : nullptr;
  if (!e) throw MissingEmbedding(std::string(image_id));
  return {id_, *e};
}

double Backend::distance(const Fingerprint& a, const Fingerprint& b) const {
  if (a.backend != id_ || b.backend != id_) {
    throw InvalidInput("cannot compare fingerprints of '" + a.backend + "' and '" + b.backend + "' with backend " + id_);
  }
  switch (spec_.kind) {
    case BackendKind::CropResistant:
      return segmented_distance(value_as<SegmentedHash>(a), value_as<SegmentedHash>(b), spec_.crop_min_segments_match);
    case BackendKind::Orb: return feature_distance(value_as<FeatureSet>(a), value_as<FeatureSet>(b));
    case BackendKind::Embedding:
      return simhaystack::distance(spec_.metric, value_as<Embedding>(a), value_as<Embedding>(b));
    default: return ber(value_as<BitHash>(a), value_as<BitHash>(b));
  }
}

Database::Database(std::string backend, std::vector<DatabaseEntry> entries, double build_seconds)
    : backend_(std::move(backend)), entries_(std::move(entries)), build_seconds_(build_seconds) {
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].fingerprint.backend != backend_) {
      throw InvalidInput("database of '" + backend_ + "' cannot hold a '" + entries_[i].fingerprint.backend +
                         "' fingerprint");
    }
    if (i > 0 && entries_[i].id == entries_[i - 1].id) {
      throw InvalidInput("duplicate database id '" + entries_[i].id + "'");
    }
  }
}

Database build_database(const Backend& backend, const std::vector<std::string>& ids,
                        const std::vector<const RasterImage*>& images, int jobs) {
  if (ids.size() != images.size()) throw InvalidInput("build_database: ids and images differ in length");
  const auto start = std::chrono::steady_clock::now();
  std::vector<DatabaseEntry> entries(ids.size(), DatabaseEntry{"", Fingerprint{backend.id(), BitHash(1)}});
  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    entries[i].id = ids[i];
    if (backend.needs_pixels()) {
      if (!images[i]) throw InvalidInput("build_database: no pixels for '" + ids[i] + "'");
      entries[i].fingerprint = backend.fingerprint(ids[i], *images[i]);
    } else {
      entries[i].fingerprint = backend.fingerprint(ids[i]);
    }
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return Database(backend.id(), std::move(entries), seconds);
}

std::optional<Match> nearest(const Backend& backend, const Fingerprint& query, const Database& db, int jobs) {
  if (db.backend() != backend.id() && !db.empty()) {
    throw InvalidInput("database of '" + db.backend() + "' queried with backend " + backend.id());
  }
  if (query.backend != backend.id()) {
    throw InvalidInput("query fingerprint of '" + query.backend + "' used with backend " + backend.id());
  }
  const auto& entries = db.entries();
  const std::size_t n = entries.size();
  if (n == 0) return std::nullopt;
  // Contiguous chunks, each keeping its first minimum; entries are id-sorted,
  // so folding the chunks in order picks the smallest id among ties.
  const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(resolve_jobs(jobs)), (n + 255) / 256);
  std::vector<std::pair<double, std::size_t>> best(std::max<std::size_t>(chunks, 1), {kInf, n});
  parallel_for(best.size(), static_cast<int>(best.size()), [&](std::size_t c) {
    const std::size_t lo = n * c / best.size();
    const std::size_t hi = n * (c + 1) / best.size();
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = backend.distance(query, entries[i].fingerprint);
      if (d < best[c].first) best[c] = {d, i};
    }
  });
  std::pair<double, std::size_t> overall{kInf, n};
  for (const auto& b : best) {
    if (b.first < overall.first) overall = b;
  }
  if (overall.second == n) return std::nullopt;
  return Match{entries[overall.second].id, overall.first};
}

std::optional<Match> best_match(const Backend& backend, const Fingerprint& query, const Database& db,
                                double threshold, int jobs) {
  auto m = nearest(backend, query, db, jobs);
  if (m && m->distance <= threshold) return m;
  return std::nullopt;
}

nlohmann::json fingerprint_to_json(const Fingerprint& fp) {
  nlohmann::json j;
  j["backend"] = fp.backend;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BitHash>) {
          j["hash"] = v.to_text();
        } else if constexpr (std::is_same_v<T, SegmentedHash>) {
          auto& segs = j["segments"] = nlohmann::json::array();
          for (const auto& s : v.segments) segs.push_back(s.to_text());
        } else if constexpr (std::is_same_v<T, FeatureSet>) {
          j["max_features"] = v.max_features;
          auto& feats = j["features"] = nlohmann::json::array();
          for (const auto& f : v.features) {
            feats.push_back({{"x", f.keypoint.x},
                             {"y", f.keypoint.y},
                             {"response", f.keypoint.response},
                             {"orientation", f.keypoint.orientation},
                             {"descriptor", f.descriptor.to_text()}});
          }
        } else {
          j["model_id"] = v.model_id;
          j["vector"] = v.vector;
        }
      },
      fp.value);
  return j;
}

Fingerprint fingerprint_from_json(const BackendSpec& spec, const nlohmann::json& j) {
  try {
    Fingerprint fp{j.at("backend").get<std::string>(), BitHash(1)};
    if (fp.backend != spec.id()) {
      throw DataError("fingerprint of '" + fp.backend + "' where '" + spec.id() + "' was expected");
    }
    switch (spec.kind) {
      case BackendKind::CropResistant: {
        SegmentedHash h;
        for (const auto& s : j.at("segments")) h.segments.push_back(BitHash::from_text(s.get<std::string>()));
        if (h.segments.empty()) throw DataError("segmented hash without segments");
        fp.value = std::move(h);
        break;
      }
      case BackendKind::Orb: {
        FeatureSet fs;
        fs.max_features = j.at("max_features").get<int>();
        for (const auto& f : j.at("features")) {
          Feature feat;
          feat.keypoint = {f.at("x").get<float>(), f.at("y").get<float>(), f.at("response").get<float>(),
                           f.at("orientation").get<float>()};
          feat.descriptor = BitHash::from_text(f.at("descriptor").get<std::string>());
          fs.features.push_back(std::move(feat));
        }
        fp.value = std::move(fs);
        break;
      }
      case BackendKind::Embedding:
        fp.value = Embedding{j.at("model_id").get<std::string>(), j.at("vector").get<std::vector<float>>()};
        break;
      default: {
        BitHash h = BitHash::from_text(j.at("hash").get<std::string>());
        if (h.size() != static_cast<std::size_t>(spec.bits)) throw DataError("hash length does not match backend");
        fp.value = std::move(h);
      }
    }
    return fp;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fingerprint: ") + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(std::string("malformed fingerprint: ") + e.what());
  }
}

nlohmann::json database_to_json(const Database& db) {
  nlohmann::json j;
  j["format"] = "simhaystack-database";
  j["version"] = 1;
  j["backend"] = db.backend();
  j["build_seconds"] = db.build_seconds();
  auto& records = j["records"] = nlohmann::json::array();
  for (const auto& e : db.entries()) records.push_back({{"id", e.id}, {"fingerprint", fingerprint_to_json(e.fingerprint)}});
  return j;
}

Database database_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "simhaystack-database" || j.at("version").get<int>() != 1) {
      throw DataError("not a version 1 simhaystack database");
    }
    const std::string backend = j.at("backend").get<std::string>();
    BackendSpec spec;
    try {
      spec = BackendSpec::parse(backend);
    } catch (const InvalidInput& e) {
      throw DataError(std::string("database backend: ") + e.what());
    }
    std::vector<DatabaseEntry> entries;
    for (const auto& r : j.at("records")) {
      entries.push_back({r.at("id").get<std::string>(), fingerprint_from_json(spec, r.at("fingerprint"))});
    }
    try {
      return Database(backend, std::move(entries), j.value("build_seconds", 0.0));
    } catch (const InvalidInput& e) {
      throw DataError(e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed database: ") + e.what());
  }
}

void save_database(const Database& db, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << database_to_json(db).dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

Database load_database(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return database_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace simhaystack
