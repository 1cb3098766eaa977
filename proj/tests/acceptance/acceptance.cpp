// Acceptance runner: one criterion per invocation, one verdict line on stdout.
// Exit codes: 0 pass, 1 fail, 77 skipped (missing external data).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "properties.hpp"
#include "roc_oracle.hpp"
#include "simhaystack/bench.hpp"
#include "simhaystack/corpus.hpp"
#include "simhaystack/embeddist.hpp"
#include "simhaystack/matching.hpp"
#include "simhaystack/perturb.hpp"
#include "simhaystack/results.hpp"
#include "simhaystack/roc.hpp"
#include "support.hpp"

using namespace simhaystack;
using namespace simhaystack::testing;
namespace fs = std::filesystem;

namespace {

constexpr int kSkip = 77;

struct Verdict {
  enum Kind { Pass, Fail, Skip } kind;
  std::string detail;
};

Verdict fail(std::string d) { return {Verdict::Fail, std::move(d)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: perturbation census -------------------------------------------------

Verdict census() {
  const std::map<std::string, std::vector<double>> table = {
      {"gaussian_noise", {0.01, 0.02, 0.05}},
      {"speckle_noise", {0.01, 0.02, 0.05}},
      {"salt_pepper", {0.05, 0.10, 0.15}},
      {"gaussian_filter", {3, 5, 7}},
      {"median_filter", {3, 5, 7}},
      {"jpeg", {10, 50, 90}},
      {"crop_rescale", {5, 10, 20, 40, 60}},
      {"rotate_rescale", {5, 10, 20, 40, 60}},
      {"shear", {1, 2, 5, 10, 20}},
      {"scale", {0.4, 0.8, 1.2, 1.6}},
      {"text", {10, 20, 30, 40, 50}},
      {"color", {0.5, 2.0 / 3.0, 1.5, 2}},
      {"sharpness", {0.5, 2.0 / 3.0, 1.5, 2}},
      {"contrast", {0.5, 2.0 / 3.0, 1.5, 2}},
      {"brightness", {0.5, 2.0 / 3.0, 1.5, 2}},
  };
  const RasterImage img = synthetic_scene(11, 256, 256);
  generate_suite("warmup.png", img, 1);  // page in lazily built tables
  const auto t0 = std::chrono::steady_clock::now();
  const auto suite = generate_suite("census.png", img, 1);
  const double took = seconds_since(t0);

  std::map<std::string, std::vector<double>> got;
  int noise = 0, geometric = 0, enhancement = 0;
  for (const auto& p : suite) {
    got[std::string(to_string(p.spec.family))].push_back(p.spec.parameter);
    switch (group_of(p.spec.family)) {
      case PerturbationGroup::NoiseLike: ++noise; break;
      case PerturbationGroup::Geometric: ++geometric; break;
      case PerturbationGroup::Enhancement: ++enhancement; break;
    }
  }
  bool same = got.size() == table.size();
  for (auto& [family, params] : got) {
    std::sort(params.begin(), params.end());
    const auto it = table.find(family);
    if (it == table.end() || it->second.size() != params.size()) {
      same = false;
      continue;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (std::abs(params[i] - it->second[i]) > 1e-12) same = false;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof detail, "%zu outputs, groups %d/%d/%d, parameters %s, %.3f s on 256x256", suite.size(),
                noise, geometric, enhancement, same ? "matches" : "differs", took);
  const bool ok = suite.size() == 58 && noise == 18 && geometric == 24 && enhancement == 16 && same && took < 1.0;
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// ---- 2: engine vs brute-force ROC ------------------------------------------

struct Instance {
  std::vector<std::string> db_ids;
  std::vector<RasterImage> db_images;
  std::vector<std::string> query_ids;
  std::vector<RasterImage> query_images;
  std::vector<std::optional<std::string>> truth;
};

Instance random_instance(Gen& gen) {
  Instance in;
  const int ndb = std::uniform_int_distribution<int>(1, 10)(gen);
  const int nq = std::uniform_int_distribution<int>(1, 20 - ndb)(gen);
  std::vector<std::uint64_t> scenes(static_cast<std::size_t>(ndb));
  for (int i = 0; i < ndb; ++i) {
    scenes[i] = gen();
    in.db_ids.push_back("d" + std::to_string(std::uniform_int_distribution<int>(0, 999)(gen)) + "_" +
                        std::to_string(i));
    in.db_images.push_back(synthetic_scene(scenes[i], 64, 56));
  }
  // a few fixed mild attacks keep positives near their sources
  const std::vector<PerturbationSpec> attacks = {{PerturbationFamily::Jpeg, 50, std::nullopt},
                                                 {PerturbationFamily::Brightness, 1.5, std::nullopt},
                                                 {PerturbationFamily::CropRescale, 10, std::nullopt},
                                                 {PerturbationFamily::GaussianFilter, 3, std::nullopt}};
  for (int q = 0; q < nq; ++q) {
    const std::string id = "q" + std::to_string(q);
    const auto& attack = attacks[std::uniform_int_distribution<std::size_t>(0, attacks.size() - 1)(gen)];
    if (std::bernoulli_distribution(0.6)(gen)) {
      const int src = std::uniform_int_distribution<int>(0, ndb - 1)(gen);
      in.truth.push_back(in.db_ids[src]);
      in.query_images.push_back(apply(attack, in.db_images[src]));
    } else {
      in.truth.push_back(std::nullopt);
      in.query_images.push_back(apply(attack, synthetic_scene(gen(), 64, 56)));
    }
    in.query_ids.push_back(id);
  }
  return in;
}

// Embedding instances: every id gets a random vector of the test model.
EmbeddingFile random_embeddings(Gen& gen, const Instance& in) {
  EmbeddingFile f;
  f.model_id = "oracle";
  f.dim = 8;
  auto add = [&](const std::string& id, const std::optional<std::vector<float>>& near) {
    std::vector<float> v = near ? *near : random_vector(gen, f.dim, 0.0f, 1.0f);
    if (near) {
      for (auto& x : v) x += std::uniform_real_distribution<float>(0.0f, 0.05f)(gen);
    }
    f.records.emplace(id, Embedding{f.model_id, v});
  };
  for (const auto& id : in.db_ids) add(id, std::nullopt);
  for (std::size_t q = 0; q < in.query_ids.size(); ++q) {
    std::optional<std::vector<float>> near;
    if (in.truth[q]) near = f.records.at(*in.truth[q]).vector;
    add(in.query_ids[q], near);
  }
  return f;
}

struct OracleCheck {
  int instances = 0;
  int thresholds = 0;
  int mismatches = 0;
  double worst_auc = 0;
};

void check_instance(const Backend& backend, const Instance& in, OracleCheck& check) {
  auto fp = [&](const std::string& id, const RasterImage& img) {
    return backend.needs_pixels() ? backend.fingerprint(id, img) : backend.fingerprint(id);
  };
  std::vector<const RasterImage*> ptrs;
  for (const auto& img : in.db_images) ptrs.push_back(&img);
  const Database db = build_database(backend, in.db_ids, ptrs, 1);

  std::vector<Fingerprint> db_fps;
  for (std::size_t d = 0; d < in.db_ids.size(); ++d) db_fps.push_back(fp(in.db_ids[d], in.db_images[d]));

  std::vector<ScoredQuery> scored;
  std::vector<OracleQuery> oracle_queries;
  for (std::size_t q = 0; q < in.query_ids.size(); ++q) {
    const Fingerprint f = fp(in.query_ids[q], in.query_images[q]);
    const auto m = nearest(backend, f, db);
    scored.push_back({m ? m->distance : std::numeric_limits<double>::infinity(), in.truth[q].has_value(),
                      m && in.truth[q] && m->id == *in.truth[q]});
    OracleQuery oq{in.truth[q], {}};
    for (std::size_t d = 0; d < in.db_ids.size(); ++d) {
      oq.distances.push_back(backend.distance(f, db_fps[d]));
    }
    oracle_queries.push_back(std::move(oq));
  }

  auto thresholds = all_pair_thresholds(oracle_queries);
  ++check.instances;
  if (thresholds.empty()) return;
  const OracleRoc oracle = brute_force_roc(in.db_ids, oracle_queries, thresholds);
  const RocCurve dense = build_roc(scored, thresholds);
  const auto exact = exact_thresholds(scored);
  const RocCurve sparse = exact.empty() ? dense : build_roc(scored, exact);
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    ++check.thresholds;
    const auto at = evaluate_threshold(scored, thresholds[i]);
    if (dense.points[i].recall != oracle.points[i].recall || dense.points[i].fpr != oracle.points[i].fpr ||
        at.recall != oracle.points[i].recall || at.fpr != oracle.points[i].fpr) {
      ++check.mismatches;
    }
  }
  check.worst_auc = std::max({check.worst_auc, std::abs(dense.auc - oracle.auc), std::abs(sparse.auc - oracle.auc)});
}

Verdict roc_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> kinds = {"ahash/16",  "phash/16", "dhash/16",   "whash/16",  "crop/16",
                                          "crop-k2/16", "orb/10",  "digest/64", "random/16", "oracle/L1",
                                          "oracle/L2", "oracle/cosine", "oracle/JS"};
  Gen gen(20240611);
  std::string detail;
  bool ok = true;
  for (const auto& kind : kinds) {
    OracleCheck check;
    for (int k = 0; k < 12; ++k) {
      const Instance in = random_instance(gen);
      EmbeddingStore store;
      const auto spec = BackendSpec::parse(kind);
      if (spec.kind == BackendKind::Embedding) store.add(random_embeddings(gen, in));
      const Backend backend(spec, &store);
      check_instance(backend, in, check);
    }
    if (check.mismatches > 0 || check.worst_auc > 1e-9) {
      ok = false;
      detail += " " + kind + ":" + std::to_string(check.mismatches) + " mismatches/" +
                std::to_string(check.thresholds) + fmt(" dAUC=%.2g", check.worst_auc);
    }
  }
  const double took = seconds_since(t0);
  if (ok) detail = std::to_string(kinds.size()) + " backend kinds agree at every threshold";
  detail += fmt(", %.1f s", took);
  return {ok && took < 10 ? Verdict::Pass : Verdict::Fail, detail};
}

// ---- 3: baselines ------------------------------------------------------------

ExperimentConfig baseline_config(const std::string& backend) {
  ExperimentConfig c;
  c.name = "baseline";
  c.synthetic = SyntheticDataset{400, 96, 72, 31};
  c.backends = {backend};
  c.sample_count = 100;
  c.seed = 5;
  c.jobs = 1;
  return c;
}

Verdict baselines() {
  const auto t0 = std::chrono::steady_clock::now();
  // perfect backend: exact content digest of an unchanged copy
  ExperimentConfig perfect = baseline_config("digest/64");
  perfect.perturbations = {{"brightness", 1.0}};
  perfect.permissive = true;
  const auto p = run_synthetic(perfect).backends.front();

  ExperimentConfig random = baseline_config("random/64");
  random.perturbations = {{"jpeg", 50}};
  const auto r = run_synthetic(random).backends.front();
  const double took = seconds_since(t0);

  char detail[200];
  std::snprintf(detail, sizeof detail, "perfect AUC=%.6f; random/64 AUC=%.4f over %zu queries (db %zu); %.1f s",
                p.overall.auc, r.overall.auc, r.positives + r.negatives, r.database_size, took);
  const bool ok = p.overall.auc == 1.0 && r.overall.auc >= 0.45 && r.overall.auc <= 0.55 &&
                  r.positives + r.negatives == 200 && took < 30;
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// ---- 4, 5: BSDS500 -------------------------------------------------------------

std::optional<fs::path> bsds_root() {
  const char* base = std::getenv("SIMHAYSTACK_DATA");
  if (!base || !*base) return std::nullopt;
  const fs::path root = fs::path(base) / "BSDS500";
  std::error_code ec;
  if (!fs::is_directory(root, ec)) return std::nullopt;
  return root;
}

ExperimentConfig bsds_config(const fs::path& root) {
  ExperimentConfig c;
  c.name = "bsds500";
  c.dataset = root;
  c.backends = {"ahash/64", "phash/64", "dhash/64", "whash/64", "crop/64"};
  c.sample_count = 100;
  c.seed = 0;
  c.database_full_half = true;
  c.fixed_thresholds = {{"dhash/64", 0.1590}};
  return c;
}

const ExperimentResult& bsds_run(const fs::path& root) {
  static const ExperimentResult result = run_synthetic(bsds_config(root));
  return result;
}

Verdict bsds_dhash_fpr() {
  const auto root = bsds_root();
  if (!root) return {Verdict::Skip, "SIMHAYSTACK_DATA/BSDS500 not available"};
  const auto t0 = std::chrono::steady_clock::now();
  const auto* d = bsds_run(*root).find("dhash/64");
  const double took = seconds_since(t0);
  if (!d || d->fixed_thresholds.empty()) return fail("dhash/64 missing from the run");
  const double fpr = d->fixed_thresholds.front().fpr;
  char detail[160];
  std::snprintf(detail, sizeof detail, "dhash/64 at 0.1590: FPR=%.3f%% recall=%.3f (%zu queries, %.0f s)", 100 * fpr,
                d->fixed_thresholds.front().recall, d->positives + d->negatives, took);
  return {fpr >= 0.001 && fpr <= 0.02 ? Verdict::Pass : Verdict::Fail, detail};
}

Verdict bsds_ordering() {
  const auto root = bsds_root();
  if (!root) return {Verdict::Skip, "SIMHAYSTACK_DATA/BSDS500 not available"};
  const auto& run = bsds_run(*root);
  const auto* d = run.find("dhash/64");
  const auto* a = run.find("ahash/64");
  const auto* w = run.find("whash/64");
  if (!d || !a || !w) return fail("block hash missing from the run");
  std::string detail = fmt("AUC dhash=%.4f", d->overall.auc) + fmt(" ahash=%.4f", a->overall.auc) +
                       fmt(" whash=%.4f", w->overall.auc);
  bool ok = d->overall.auc > a->overall.auc && d->overall.auc > w->overall.auc;
  auto curve = [](const BackendResult& b, const std::string& family, const std::string& param) -> const RocCurve* {
    const auto& list = param == "all" ? b.per_family : b.per_attack;
    for (const auto& c : list) {
      if (c.family == family && c.parameter == param) return &c.curve;
    }
    return nullptr;
  };
  for (const auto& b : run.backends) {
    const RocCurve* rot = curve(b, "rotate_rescale", "60");
    const RocCurve* sh = curve(b, "shear", "20");
    if (!rot || !sh) {
      ok = false;
      detail += "; " + b.backend + " lacks rotate_rescale/60 or shear/20";
      continue;
    }
    for (const char* noise : {"gaussian_noise", "speckle_noise", "salt_pepper"}) {
      const RocCurve* n = curve(b, noise, "all");
      if (!n || !(n->auc > rot->auc && n->auc > sh->auc)) {
        ok = false;
        detail += "; " + b.backend + " " + noise + fmt("=%.4f", n ? n->auc : NAN) + fmt(" vs rot60=%.4f", rot->auc) +
                  fmt(" shear20=%.4f", sh->auc);
      }
    }
  }
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// ---- 6: scaling ------------------------------------------------------------------

Verdict scaling(bool large) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.name = "scaling";
  c.synthetic = SyntheticDataset{large ? 50000u : 5000u, 128, 96, 7};
  c.backends = {"ahash/64", "phash/64", "dhash/64", "whash/64", "crop/64"};
  c.sample_count = 100;
  c.seed = 1;
  c.db_sizes = {250, 2500};
  if (large) c.db_sizes.push_back(25000);
  const auto runs = run_scaling(c);
  const double took = seconds_since(t0);
  bool ok = runs.size() == c.db_sizes.size();
  std::string detail;
  for (const auto& backend : c.backends) {
    const auto* small = runs.front().find(backend);
    detail += (detail.empty() ? "" : "; ") + backend + fmt(" %.4f", small->overall.auc);
    for (std::size_t i = 1; i < runs.size(); ++i) {
      const auto* big = runs[i].find(backend);
      detail += fmt(" -> %.4f", big->overall.auc);
      if (big->overall.auc > small->overall.auc + 0.01) ok = false;
    }
  }
  detail += fmt("; %.0f s", took);
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// ---- 7: determinism -------------------------------------------------------------

int run_tool(std::vector<std::string> args, std::string& err_text) {
  args.insert(args.begin(), "simhaystack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  err_text = err.str();
  return code;
}

Verdict determinism() {
  TempDir dir("acceptance-determinism");
  const fs::path cfg = dir.path() / "det.yaml";
  std::ofstream(cfg) << "name: determinism\n"
                        "dataset: synthetic\n"
                        "synthetic: {count: 40, width: 64, height: 48, seed: 8}\n"
                        "backends: [ahash/64, phash/64, dhash/64, whash/64, crop/64, orb/30, random/64]\n"
                        "sample_count: 4\n"
                        "seed: 1234\n"
                        "fixed_thresholds: {dhash/64: 0.159}\n";
  std::vector<std::string> dumps;
  for (const char* jobs : {"1", "1", "2"}) {
    const fs::path out = dir.path() / ("run" + std::to_string(dumps.size()));
    std::string err;
    if (run_tool({"bench-synthetic", "-c", cfg.string(), "-o", out.string(), "-j", jobs}, err) != 0) {
      return fail("bench-synthetic failed: " + err);
    }
    dumps.push_back(redact_timings(read_json(out / "results.json")).dump(1));
  }
  const bool same = dumps[0] == dumps[1] && dumps[1] == dumps[2];
  return {same ? Verdict::Pass : Verdict::Fail,
          std::string("3 runs (jobs 1,1,2), ") + std::to_string(dumps[0].size()) + " redacted bytes " +
              (same ? "identical" : "differ")};
}

// ---- 8: property suites -------------------------------------------------------

Verdict properties() {
  const std::vector<std::function<PropertyReport(std::uint64_t, int)>> suites = {
      hamming_metric_axioms, transform_linearity, transform_parseval,
      dhash_monotone_remap,  enhancement_identity, roc_monotonicity};
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 99;
  for (const auto& suite : suites) {
    const PropertyReport r = suite(seed++, 200);
    detail += (detail.empty() ? "" : ", ") + r.name + " " + std::to_string(r.cases - r.failures) + "/" +
              std::to_string(r.cases);
    if (!r.ok() || r.cases < 200) {
      ok = false;
      detail += " (" + r.first_failure + ")";
    }
  }
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// ---- 9: distances ---------------------------------------------------------------

Verdict distances() {
  double worst_onehot = 0;
  for (std::size_t dim = 2; dim <= 64; ++dim) {
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<float> a(dim, 0.0f), b(dim, 0.0f);
      a[i] = 1.0f;
      b[(i + 1) % dim] = 1.0f;
      worst_onehot = std::max(worst_onehot, std::abs(jensen_shannon_distance(a, b) - std::sqrt(std::log(2.0))));
    }
  }

  // Components are 10-bit integers and factors m * 2^e with a 10-bit m, so
  // every rescaled vector is exactly representable in float. Exponents stay
  // in a range where the 1e-12 smoothing term is negligible.
  Gen gen(909);
  double worst_scale = 0;
  std::uniform_int_distribution<int> component(0, 1023);
  std::uniform_int_distribution<int> mantissa(1, 1023);
  std::uniform_int_distribution<int> exponent(-10, 10);
  for (int k = 0; k < 500; ++k) {
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 64)(gen);
    std::vector<float> a(dim), b(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      a[i] = static_cast<float>(component(gen));
      b[i] = static_cast<float>(component(gen));
    }
    const float s = std::ldexp(static_cast<float>(mantissa(gen)), exponent(gen));
    const float t = std::ldexp(static_cast<float>(mantissa(gen)), exponent(gen));
    std::vector<float> as(a), bt(b);
    for (auto& v : as) v *= s;
    for (auto& v : bt) v *= t;
    worst_scale = std::max(worst_scale, std::abs(jensen_shannon_distance(as, bt) - jensen_shannon_distance(a, b)));
  }

  double worst_self = 0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 128)(gen);
    const auto a = random_vector(gen, dim, -10.0f, 10.0f);
    for (auto m : {DistanceMetric::L1, DistanceMetric::L2, DistanceMetric::Cosine, DistanceMetric::JensenShannon}) {
      const Embedding e{"m", a};
      worst_self = std::max(worst_self, std::abs(distance(m, e, e)));
    }
  }
  char detail[200];
  std::snprintf(detail, sizeof detail, "one-hot JS err %.2g, scale err %.2g, max self distance %.2g", worst_onehot,
                worst_scale, worst_self);
  const bool ok = worst_onehot <= 1e-9 && worst_scale <= 1e-9 && worst_self == 0.0;
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simhaystack acceptance criteria"};
  int criterion = 0;
  bool large = false;
  app.add_option("--criterion,-c", criterion, "criterion number 1-9")->required()->check(CLI::Range(1, 9));
  app.add_flag("--large", large, "criterion 6: also run the 25000-entry database");
  CLI11_PARSE(app, argc, argv);

  Verdict v{Verdict::Fail, ""};
  try {
    switch (criterion) {
      case 1: v = census(); break;
      case 2: v = roc_oracle(); break;
      case 3: v = baselines(); break;
      case 4: v = bsds_dhash_fpr(); break;
      case 5: v = bsds_ordering(); break;
      case 6: v = scaling(large); break;
      case 7: v = determinism(); break;
      case 8: v = properties(); break;
      case 9: v = distances(); break;
    }
  } catch (const std::exception& e) {
    v = fail(std::string("error: ") + e.what());
  }
  static const char* const kNames[] = {"PASS", "FAIL", "SKIP"};
  std::cout << "criterion " << criterion << " " << kNames[v.kind] << " " << v.detail << std::endl;
  return v.kind == Verdict::Pass ? 0 : v.kind == Verdict::Skip ? kSkip : 1;
}
