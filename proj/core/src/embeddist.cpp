#include "simhaystack/embeddist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace {

void check_dims(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("embedding dimension mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
  if (a.empty()) throw InvalidInput("embeddings must have at least one component");
}

std::vector<double> to_distribution(std::span<const float> v) {
  std::vector<double> p(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[i] = std::max(0.0, static_cast<double>(v[i])) + kJensenShannonEpsilon;
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw ParseError(std::string("truncated EMB1 file reading ") + what, pos_);
  }
  template <typename T>
  T read(const char* what) {
    need(sizeof(T), what);
    T v{};
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) v = byteswap(v);
    pos_ += sizeof(T);
    return v;
  }
  std::string read_string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  template <typename T>
  static T byteswap(T v) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  const auto* b = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), b, b + sizeof(T));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw InvalidInput("EMB1 strings are limited to 65535 bytes");
  put(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

std::string_view to_string(DistanceMetric metric) noexcept {
  switch (metric) {
    case DistanceMetric::L1: return "L1";
    case DistanceMetric::L2: return "L2";
    case DistanceMetric::Cosine: return "cosine";
    case DistanceMetric::JensenShannon: return "JS";
  }
  return "?";
}

DistanceMetric parse_metric(std::string_view name) {
  const std::string n = lower(name);
  if (n == "l1") return DistanceMetric::L1;
  if (n == "l2") return DistanceMetric::L2;
  if (n == "cosine" || n == "cos") return DistanceMetric::Cosine;
  if (n == "js" || n == "jensen-shannon" || n == "jensen_shannon") return DistanceMetric::JensenShannon;
  throw InvalidInput("unknown distance metric '" + std::string(name) + "'");
}

double l1_distance(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]) - b[i]);
  return acc;
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  if (std::equal(a.begin(), a.end(), b.begin())) return 0.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

double jensen_shannon_distance(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  const auto p = to_distribution(a);
  const auto q = to_distribution(b);
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    js += 0.5 * p[i] * std::log(p[i] / m) + 0.5 * q[i] * std::log(q[i] / m);
  }
  return std::sqrt(std::max(0.0, js));
}

double distance(DistanceMetric metric, const Embedding& a, const Embedding& b) {
  if (a.model_id != b.model_id) {
    throw InvalidInput("embeddings from different models: '" + a.model_id + "' vs '" + b.model_id + "'");
  }
  switch (metric) {
    case DistanceMetric::L1: return l1_distance(a.vector, b.vector);
    case DistanceMetric::L2: return l2_distance(a.vector, b.vector);
    case DistanceMetric::Cosine: return cosine_distance(a.vector, b.vector);
    case DistanceMetric::JensenShannon: return jensen_shannon_distance(a.vector, b.vector);
  }
  throw InvalidInput("unknown distance metric");
}

EmbeddingFile parse_embeddings(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.read_string(4, "magic") != "EMB1") throw ParseError("bad EMB1 magic", 0);
  EmbeddingFile file;
  const auto count = r.read<std::uint32_t>("record count");
  file.dim = r.read<std::uint32_t>("dimension");
  const auto model_len = r.read<std::uint16_t>("model id length");
  file.model_id = r.read_string(model_len, "model id");
  if (count > 0 && file.dim == 0) throw ParseError("EMB1 dimension must be >= 1", 8);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t record_offset = r.offset();
    const auto id_len = r.read<std::uint16_t>("record id length");
    std::string id = r.read_string(id_len, "record id");
    Embedding e{file.model_id, std::vector<float>(file.dim)};
    r.need(static_cast<std::size_t>(file.dim) * 4, "vector");
    for (std::uint32_t k = 0; k < file.dim; ++k) {
      const std::size_t at = r.offset();
      const auto v = std::bit_cast<float>(r.read<std::uint32_t>("vector"));
      if (!std::isfinite(v)) {
        throw ParseError("non-finite component " + std::to_string(k) + " in record '" + id + "'", at);
      }
      e.vector[k] = v;
    }
    if (!file.records.emplace(id, std::move(e)).second) {
      throw ParseError("duplicate EMB1 record id '" + id + "'", record_offset);
    }
  }
  if (!r.at_end()) throw ParseError("trailing bytes after the last EMB1 record", r.offset());
  return file;
}

EmbeddingFile load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_embeddings(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.message(), e.offset());
  }
}

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingFile& file) {
  std::vector<std::uint8_t> out = {'E', 'M', 'B', '1'};
  put(out, static_cast<std::uint32_t>(file.records.size()));
  put(out, file.dim);
  put_string(out, file.model_id);
  for (const auto& [id, e] : file.records) {
    if (e.dim() != file.dim) throw InvalidInput("record '" + id + "' has the wrong dimension");
    put_string(out, id);
    for (float v : e.vector) put(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void save_embeddings(const EmbeddingFile& file, const std::filesystem::path& path) {
  const auto bytes = serialize_embeddings(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace simhaystack
