#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "simhaystack/corpus.hpp"
#include "simhaystack/error.hpp"
#include "simhaystack/matching.hpp"
#include "support.hpp"

using namespace simhaystack;
using namespace simhaystack::testing;

namespace {

Fingerprint bits_fp(const std::string& backend, const BitHash& h) { return {backend, h}; }

// Hash with the first `ones` of `n` bits set.
BitHash prefix_ones(std::size_t n, std::size_t ones) {
  BitHash h(n);
  for (std::size_t i = 0; i < ones; ++i) h.set(i);
  return h;
}

std::optional<Match> argmin_oracle(const Backend& b, const Fingerprint& q, const Database& db) {
  std::optional<Match> best;
  for (const auto& e : db.entries()) {
    const double d = b.distance(q, e.fingerprint);
    if (std::isinf(d)) continue;
    if (!best || d < best->distance || (d == best->distance && e.id < best->id)) best = Match{e.id, d};
  }
  return best;
}

}  // namespace

TEST(BackendSpec, ParseAndId) {
  for (const char* text : {"ahash/64", "phash/16", "dhash/256", "whash/64", "crop/64", "crop-k2/64", "orb/30",
                           "digest/64", "random/64", "toy/JS", "simclr_v2_resnet50_2x/L2", "a/b/cosine"}) {
    EXPECT_EQ(BackendSpec::parse(text).id(), text);
  }
  const auto e = BackendSpec::parse("a/b/cosine");
  EXPECT_EQ(e.kind, BackendKind::Embedding);
  EXPECT_EQ(e.model_id, "a/b");
  EXPECT_EQ(e.metric, DistanceMetric::Cosine);
  EXPECT_EQ(BackendSpec::parse("crop-k3/16").crop_min_segments_match, 3);
  EXPECT_EQ(BackendSpec::parse("m/jensen-shannon").id(), "m/JS");
  EXPECT_TRUE(BackendSpec::parse("crop/64").is_block_hash());
  EXPECT_FALSE(BackendSpec::parse("orb/30").is_block_hash());
}

TEST(BackendSpec, Rejects) {
  for (const char* text : {"dhash", "dhash/", "/64", "dhash/63", "whash/36", "orb/0", "orb/x", "dhash/-4",
                           "toy/hamming", "crop-k0/64"}) {
    EXPECT_THROW(BackendSpec::parse(text), InvalidInput) << text;
  }
}

TEST(Fingerprint, Contracts) {
  const RasterImage img = synthetic_scene(3, 128, 96);
  const Backend d(BackendSpec::parse("dhash/64"));
  const auto fp = d.fingerprint("x", img);
  EXPECT_EQ(fp.backend, "dhash/64");
  EXPECT_EQ(std::get<BitHash>(fp.value).size(), 64u);

  const Backend orb(BackendSpec::parse("orb/30"));
  EXPECT_LE(std::get<FeatureSet>(orb.fingerprint("x", img).value).features.size(), 30u);

  const Backend crop(BackendSpec::parse("crop/16"));
  EXPECT_EQ(std::get<SegmentedHash>(crop.fingerprint("x", img).value).hash_length(), 16u);
}

TEST(Fingerprint, MissingEmbedding) {
  const Backend none(BackendSpec::parse("simclr_v2/JS"));
  EXPECT_THROW(none.fingerprint("a.png"), MissingEmbedding);
  EmbeddingStore store;
  store.add(load_embeddings(data_dir() / "toy.emb1"));
  const Backend toy(BackendSpec::parse("toy/JS"), &store);
  EXPECT_NO_THROW(toy.fingerprint("a.png"));
  EXPECT_THROW(toy.fingerprint("zzz.png"), MissingEmbedding);
  try {
    toy.fingerprint("zzz.png");
  } catch (const MissingEmbedding& e) {
    EXPECT_EQ(e.image_id(), "zzz.png");
  }
  EXPECT_THROW(Backend(BackendSpec::parse("dhash/64")).fingerprint("a.png"), InvalidInput);
}

TEST(EmbeddingStore, StemLookups) {
  EmbeddingStore store;
  store.add(load_embeddings(data_dir() / "toy.emb1"));
  store.add(load_embeddings(data_dir() / "other_model.emb1"));
  EXPECT_EQ(store.size(), 4u);
  ASSERT_NE(store.find("toy", "a.png"), nullptr);
  ASSERT_NE(store.find("toy", "a"), nullptr);
  EXPECT_EQ(store.find("toy", "a")->vector, (std::vector<float>{1, 0, 0}));
  ASSERT_NE(store.find("toy", "c.png"), nullptr);
  EXPECT_EQ(store.find("toy", "c.JPG")->vector, (std::vector<float>{0.1f, 2, 3}));
  EXPECT_EQ(store.find("toy", "d"), nullptr);
  EXPECT_EQ(store.find("other", "a")->vector, (std::vector<float>{3, 4}));
  EXPECT_EQ(store.find("other", "b.png"), nullptr);
  EXPECT_TRUE(store.has_model("toy"));
  EXPECT_FALSE(store.has_model("to"));
  EXPECT_THROW(store.add(load_embeddings(data_dir() / "toy.emb1")), InvalidInput);
}

BitHash bits(const Fingerprint& f) { return std::get<BitHash>(f.value); }

TEST(Fingerprint, RandomAndDigestBackends) {
  BackendSpec r = BackendSpec::parse("random/64");
  r.seed = 11;
  const Backend rb(r);
  const RasterImage img = synthetic_scene(1, 32, 32);
  EXPECT_EQ(bits(rb.fingerprint("a", img)), bits(rb.fingerprint("a")));
  EXPECT_NE(bits(rb.fingerprint("a")), bits(rb.fingerprint("b")));
  r.seed = 12;
  EXPECT_NE(bits(Backend(r).fingerprint("a")), bits(rb.fingerprint("a")));

  const Backend digest(BackendSpec::parse("digest/64"));
  EXPECT_EQ(bits(digest.fingerprint("a", img)), bits(digest.fingerprint("b", RasterImage(img))));
  RasterImage changed = img;
  changed.at(5, 5, 1) ^= 1;
  EXPECT_GT(digest.distance(digest.fingerprint("a", img), digest.fingerprint("a", changed)), 0.0);
}

TEST(Distance, BackendMismatchRejected) {
  const Backend d(BackendSpec::parse("dhash/64"));
  const Backend a(BackendSpec::parse("ahash/64"));
  const RasterImage img = synthetic_scene(1, 32, 32);
  EXPECT_THROW(d.distance(d.fingerprint("x", img), a.fingerprint("x", img)), InvalidInput);
}

TEST(BestMatch, Examples) {
  const Backend b(BackendSpec::parse("dhash/64"));
  const Backend h(BackendSpec::parse("random/20"));
  std::vector<DatabaseEntry> entries = {
      {"p10", bits_fp("random/20", prefix_ones(20, 2))},
      {"p25", bits_fp("random/20", prefix_ones(20, 5))},
      {"p40", bits_fp("random/20", prefix_ones(20, 8))},
  };
  const Database db("random/20", entries);
  const Fingerprint q = bits_fp("random/20", BitHash(20));
  const auto m = best_match(h, q, db, 0.2);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->id, "p10");
  EXPECT_DOUBLE_EQ(m->distance, 0.10);
  EXPECT_FALSE(best_match(h, q, db, 0.05));

  const auto exact = best_match(h, entries[1].fingerprint, db, 0.0);
  ASSERT_TRUE(exact);
  EXPECT_EQ(exact->id, "p25");
  EXPECT_EQ(exact->distance, 0.0);

  EXPECT_FALSE(best_match(h, q, Database("random/20", {}), 1.0));
  EXPECT_THROW(best_match(b, q, db, 1.0), InvalidInput);
}

TEST(BestMatch, TiesGoToTheSmallestId) {
  const Backend h(BackendSpec::parse("random/8"));
  BitHash one(8);
  one.set(0);
  std::vector<DatabaseEntry> entries;
  for (const char* id : {"m", "c", "x", "a_far", "b"}) {
    entries.push_back({id, bits_fp("random/8", std::string(id) == "a_far" ? prefix_ones(8, 8) : one)});
  }
  const Database forward("random/8", entries);
  std::reverse(entries.begin(), entries.end());
  const Database backward("random/8", entries);
  const Fingerprint q = bits_fp("random/8", BitHash(8));
  for (const Database* db : {&forward, &backward}) {
    for (int jobs : {1, 2, 4}) {
      const auto m = nearest(h, q, *db, jobs);
      ASSERT_TRUE(m);
      EXPECT_EQ(m->id, "b");
    }
  }
}

TEST(BestMatch, AgreesWithArgminAcrossJobCounts) {
  Gen gen(61);
  for (int trial = 0; trial < 30; ++trial) {
    const Backend h(BackendSpec::parse("random/16"));
    std::vector<DatabaseEntry> entries;
    std::uniform_int_distribution<int> size(1, 1500);
    const int n = size(gen);
    for (int i = 0; i < n; ++i) entries.push_back({"id" + std::to_string(i), bits_fp("random/16", random_hash(gen, 16))});
    const Database db("random/16", std::move(entries));
    const Fingerprint q = bits_fp("random/16", random_hash(gen, 16));
    const auto expected = argmin_oracle(h, q, db);
    for (int jobs : {1, 3, 8}) EXPECT_EQ(nearest(h, q, db, jobs), expected);
  }
}

TEST(BestMatch, MonotoneInThreshold) {
  Gen gen(62);
  const Backend h(BackendSpec::parse("random/32"));
  std::vector<DatabaseEntry> entries;
  for (int i = 0; i < 50; ++i) entries.push_back({"e" + std::to_string(i), bits_fp("random/32", random_hash(gen, 32))});
  const Database db("random/32", std::move(entries));
  for (int k = 0; k < 50; ++k) {
    const Fingerprint q = bits_fp("random/32", random_hash(gen, 32));
    bool was = false;
    for (int t = 0; t <= 32; ++t) {
      const bool now = best_match(h, q, db, t / 32.0).has_value();
      EXPECT_TRUE(now || !was);
      was = now;
    }
  }
}

TEST(BestMatch, OrbEmptySetsNeverMatch) {
  const Backend orb(BackendSpec::parse("orb/30"));
  const Fingerprint empty = orb.fingerprint("flat", RasterImage(64, 64, 1, 10));
  EXPECT_TRUE(std::get<FeatureSet>(empty.value).empty());
  const Database db("orb/30", {{"flat", empty}});
  EXPECT_FALSE(nearest(orb, empty, db));
}

TEST(Database, RejectsDuplicatesAndMixedBackends) {
  const Fingerprint fp = bits_fp("random/8", BitHash(8));
  EXPECT_THROW(Database("random/8", {{"a", fp}, {"a", fp}}), InvalidInput);
  EXPECT_THROW(Database("random/16", {{"a", fp}}), InvalidInput);
  const Database db("random/8", {{"b", fp}, {"a", fp}});
  EXPECT_EQ(db.entries().front().id, "a");
}

TEST(Database, BuildAndJsonRoundTrip) {
  std::vector<RasterImage> imgs;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    imgs.push_back(synthetic_scene(100 + i, 96, 96));
    ids.push_back("img" + std::to_string(i) + ".png");
  }
  std::vector<const RasterImage*> ptrs;
  for (const auto& im : imgs) ptrs.push_back(&im);
  EmbeddingStore store;
  store.add(load_embeddings(data_dir() / "toy.emb1"));
  TempDir dir("db");
  for (const char* text : {"dhash/64", "crop/64", "orb/30", "whash/16", "digest/64"}) {
    const Backend b(BackendSpec::parse(text));
    const Database db = build_database(b, ids, ptrs, 2);
    EXPECT_EQ(db.size(), 4u);
    EXPECT_GE(db.build_seconds(), 0.0);
    const auto path = dir.path() / "db.json";
    save_database(db, path);
    const Database back = load_database(path);
    EXPECT_EQ(back.backend(), db.backend());
    ASSERT_EQ(back.size(), db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
      EXPECT_EQ(back.entries()[i].id, db.entries()[i].id);
      EXPECT_EQ(fingerprint_to_json(back.entries()[i].fingerprint), fingerprint_to_json(db.entries()[i].fingerprint));
      EXPECT_EQ(b.distance(back.entries()[i].fingerprint, db.entries()[i].fingerprint), 0.0) << text;
    }
  }
  const Backend toy(BackendSpec::parse("toy/L2"), &store);
  const Database edb = build_database(toy, {"a.png", "c"}, {nullptr, nullptr});
  const Database eback = database_from_json(database_to_json(edb));
  EXPECT_EQ(toy.distance(eback.entries()[1].fingerprint, edb.entries()[1].fingerprint), 0.0);
}

TEST(Database, LoadErrors) {
  TempDir dir("dbbad");
  EXPECT_THROW(load_database(dir.path() / "missing.json"), DataError);
  const auto p = dir.path() / "bad.json";
  std::ofstream(p) << "{\"format\":\"simhaystack-database\",\"version\":2}";
  EXPECT_THROW(load_database(p), DataError);
  std::ofstream(p) << "not json";
  EXPECT_THROW(load_database(p), DataError);
  std::ofstream(p) << R"({"format":"simhaystack-database","version":1,"backend":"dhash/64","records":[{"id":"a","fingerprint":{"backend":"dhash/64","hash":"16:0000"}}]})";
  EXPECT_THROW(load_database(p), DataError);
}
