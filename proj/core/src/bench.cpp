#include "simhaystack/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include "simhaystack/config.hpp"
#include "simhaystack/error.hpp"
#include "simhaystack/image_io.hpp"
#include "simhaystack/parallel.hpp"
#include "simhaystack/rng.hpp"

namespace simhaystack {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view purpose) {
  return SeedHasher(seed).add(purpose).digest();
}

// Fisher-Yates with our own generator so the order is the same everywhere.
void shuffle(std::vector<std::string>& v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

struct Source {
  std::string id;
  std::optional<std::string> truth;  // database id the queries should match
};

struct QueryPlan {
  std::vector<Source> sources;
  std::vector<std::pair<PerturbationFamily, double>> perturbations;  // empty = full suite
  std::uint64_t perturb_seed = 0;
  PerturbOptions options;
  bool unperturbed = false;  // templates: the source itself is the query
};

std::vector<PerturbationSpec> specs_for(const QueryPlan& plan, const std::string& source) {
  if (plan.perturbations.empty()) return suite_specs(source, plan.perturb_seed);
  std::vector<PerturbationSpec> specs;
  for (const auto& [family, p] : plan.perturbations) {
    std::optional<std::uint64_t> seed;
    if (is_stochastic(family)) seed = derive_seed(plan.perturb_seed, family, p, source);
    specs.push_back({family, p, seed});
  }
  return specs;
}

struct QueryFingerprints {
  std::vector<QueryRecord> records;                 // nearest left empty
  std::vector<std::vector<Fingerprint>> per_backend;  // [backend][query]
  std::vector<double> fingerprint_s;                 // per backend
};

QueryFingerprints fingerprint_queries(const QueryPlan& plan, const std::vector<Backend>& backends,
                                      const std::function<RasterImage(const std::string&)>& load, int jobs) {
  const bool need_pixels =
      std::any_of(backends.begin(), backends.end(), [](const Backend& b) { return b.needs_pixels(); });
  const std::size_t nb = backends.size();
  struct Slot {
    std::vector<QueryRecord> records;
    std::vector<std::vector<Fingerprint>> fps;
    std::vector<double> seconds;
  };
  std::vector<Slot> slots(plan.sources.size());
  parallel_for(plan.sources.size(), jobs, [&](std::size_t s) {
    const Source& src = plan.sources[s];
    Slot& slot = slots[s];
    slot.fps.resize(nb);
    slot.seconds.assign(nb, 0.0);
    RasterImage original;
    if (need_pixels) original = load(src.id);
    auto add_query = [&](QueryRecord rec, const RasterImage* img) {
      for (std::size_t b = 0; b < nb; ++b) {
        const auto start = Clock::now();
        slot.fps[b].push_back(backends[b].needs_pixels() ? backends[b].fingerprint(rec.query_id, *img)
                                                         : backends[b].fingerprint(rec.query_id));
        slot.seconds[b] += seconds_since(start);
      }
      slot.records.push_back(std::move(rec));
    };
    if (plan.unperturbed) {
      add_query({src.id, src.truth.value_or(src.id), "in_the_wild", "none", src.truth.has_value(), std::nullopt},
                &original);
      return;
    }
    for (const auto& spec : specs_for(plan, src.id)) {
      QueryRecord rec{src.id + "__" + spec.name(), src.truth.value_or(src.id), std::string(to_string(spec.family)),
                      parameter_label(spec.parameter), src.truth.has_value(), std::nullopt};
      if (need_pixels) {
        const RasterImage perturbed = apply(spec, original, plan.options);
        add_query(std::move(rec), &perturbed);
      } else {
        add_query(std::move(rec), nullptr);
      }
    }
  });
  QueryFingerprints out;
  out.per_backend.resize(nb);
  out.fingerprint_s.assign(nb, 0.0);
  for (auto& slot : slots) {
    for (auto& r : slot.records) out.records.push_back(std::move(r));
    for (std::size_t b = 0; b < nb; ++b) {
      for (auto& fp : slot.fps[b]) out.per_backend[b].push_back(std::move(fp));
      out.fingerprint_s[b] += slot.seconds[b];
    }
  }
  return out;
}

/// Match already fingerprinted queries against one database per backend.
std::vector<BackendRun> match_queries(const QueryFingerprints& q, const std::vector<std::string>& database,
                                      const std::vector<Backend>& backends,
                                      const std::function<const RasterImage*(const std::string&)>& pixels,
                                      const ThresholdSweep& sweep,
                                      const std::map<std::string, double>& fixed, int jobs) {
  std::vector<const RasterImage*> images;
  images.reserve(database.size());
  const bool need_pixels =
      std::any_of(backends.begin(), backends.end(), [](const Backend& b) { return b.needs_pixels(); });
  for (const auto& id : database) images.push_back(need_pixels ? pixels(id) : nullptr);

  std::vector<BackendRun> runs;
  for (std::size_t b = 0; b < backends.size(); ++b) {
    const Backend& backend = backends[b];
    const Database db = build_database(backend, database, images, jobs);
    std::vector<QueryRecord> records = q.records;
    std::vector<double> seconds(records.size(), 0.0);
    parallel_for(records.size(), jobs, [&](std::size_t i) {
      const auto start = Clock::now();
      records[i].nearest = nearest(backend, q.per_backend[b][i], db, 1);
      seconds[i] = seconds_since(start);
    });
    BackendRun run;
    run.result = summarise(backend.id(), records, sweep, fixed);
    run.result.database_size = db.size();
    run.result.timings.database_build_s = db.build_seconds();
    run.result.timings.fingerprint_s = q.fingerprint_s[b];
    for (double s : seconds) run.result.timings.match_s += s;
    run.queries = std::move(records);
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<std::pair<PerturbationFamily, double>> parse_perturbations(const ExperimentConfig& config) {
  std::vector<std::pair<PerturbationFamily, double>> out;
  for (const auto& [name, p] : config.perturbations) out.emplace_back(parse_family(name), p);
  return out;
}

QueryPlan make_query_plan(const std::vector<std::string>& positives, const std::vector<std::string>& negatives,
                          std::vector<std::pair<PerturbationFamily, double>> perturbations, std::uint64_t seed,
                          bool permissive) {
  QueryPlan plan;
  for (const auto& id : positives) plan.sources.push_back({id, id});
  for (const auto& id : negatives) plan.sources.push_back({id, std::nullopt});
  plan.perturbations = std::move(perturbations);
  plan.perturb_seed = stream_seed(seed, "perturb");
  plan.options.permissive = permissive;
  for (const auto& [family, p] : plan.perturbations) {
    PerturbationSpec{family, p, is_stochastic(family) ? std::optional<std::uint64_t>(0) : std::nullopt}.validate(
        permissive);
  }
  return plan;
}

/// Decoded database images, loaded once and shared by every backend.
class PixelCache {
 public:
  PixelCache(const ImageCorpus& corpus, const std::vector<std::string>& ids, int jobs) {
    images_.resize(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) { images_[i] = corpus.load(ids[i]); });
    for (std::size_t i = 0; i < ids.size(); ++i) index_.emplace(ids[i], i);
  }
  const RasterImage* get(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &images_[it->second];
  }

 private:
  std::vector<RasterImage> images_;
  std::unordered_map<std::string, std::size_t> index_;
};

bool any_pixels(const std::vector<Backend>& backends) {
  return std::any_of(backends.begin(), backends.end(), [](const Backend& b) { return b.needs_pixels(); });
}

nlohmann::json split_json(const SplitManifest& m) {
  return {{"experimental", m.experimental.size()},
          {"control", m.control.size()},
          {"sampled_experimental", m.sampled_experimental.size()},
          {"sampled_control", m.sampled_control.size()},
          {"database", m.database.size()}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (sample_count == 0) throw InvalidInput("sample_count must be at least 1");
  if (backends.empty()) throw InvalidInput("at least one backend is required");
  for (const auto& b : backends) BackendSpec::parse(b);
  if (sweep.mode == SweepMode::Grid && sweep.grid_points < 2) throw InvalidInput("a grid sweep needs >= 2 points");
  if (db_sizes.empty()) throw InvalidInput("db_sizes must not be empty");
  for (auto s : db_sizes) {
    if (s == 0) throw InvalidInput("database sizes must be positive");
  }
  if (jobs < 0) throw InvalidInput("jobs must be >= 0");
  for (const auto& [name, p] : perturbations) {
    const auto family = parse_family(name);
    PerturbationSpec{family, p, is_stochastic(family) ? std::optional<std::uint64_t>(0) : std::nullopt}.validate(
        permissive);
  }
  if (synthetic && (synthetic->count < 2 || synthetic->width < 8 || synthetic->height < 8)) {
    throw InvalidInput("synthetic dataset needs >= 2 images of at least 8x8");
  }
}

const BackendResult* ExperimentResult::find(std::string_view backend) const {
  for (const auto& b : backends) {
    if (b.backend == backend) return &b;
  }
  return nullptr;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_dataset(std::vector<std::string> ids,
                                                                            std::uint64_t seed) {
  if (ids.size() < 2) throw InvalidInput("splitting needs at least 2 ids");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw InvalidInput("duplicate ids in dataset");
  shuffle(ids, seed);
  const std::size_t half = (ids.size() + 1) / 2;
  std::vector<std::string> experimental(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<std::string> control(ids.begin() + static_cast<std::ptrdiff_t>(half), ids.end());
  std::sort(experimental.begin(), experimental.end());
  std::sort(control.begin(), control.end());
  return {std::move(experimental), std::move(control)};
}

std::vector<std::string> sample_ids(const std::vector<std::string>& ids, std::size_t count, std::uint64_t seed) {
  if (count > ids.size()) {
    throw InvalidInput("cannot sample " + std::to_string(count) + " of " + std::to_string(ids.size()) + " ids");
  }
  std::vector<std::string> pool = ids;
  std::sort(pool.begin(), pool.end());
  shuffle(pool, seed);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

ScoredQuery score(const QueryRecord& q) {
  ScoredQuery s;
  s.distance = q.nearest ? q.nearest->distance : std::numeric_limits<double>::infinity();
  s.positive = q.positive;
  s.correct = q.positive && q.nearest && q.nearest->id == q.source_id;
  return s;
}

BackendResult summarise(const std::string& backend, std::span<const QueryRecord> queries,
                        const ThresholdSweep& sweep, const std::map<std::string, double>& fixed_thresholds) {
  if (queries.empty()) throw InvalidInput("no queries to summarise");
  auto curve_of = [&](std::span<const ScoredQuery> scored) {
    const auto thresholds =
        sweep.mode == SweepMode::Exact ? exact_thresholds(scored) : grid_thresholds(scored, sweep.grid_points);
    return build_roc(scored, thresholds);
  };

  BackendResult r;
  r.backend = backend;
  std::vector<ScoredQuery> all;
  all.reserve(queries.size());
  std::vector<std::string> attack_order;
  std::vector<std::string> family_order;
  std::map<std::string, std::vector<ScoredQuery>> by_attack;
  std::map<std::string, std::vector<ScoredQuery>> by_family;
  std::map<std::string, std::pair<std::string, std::string>> attack_names;
  for (const auto& q : queries) {
    const ScoredQuery s = score(q);
    all.push_back(s);
    (q.positive ? r.positives : r.negatives) += 1;
    const std::string key = q.family + "\x1f" + q.parameter;
    auto [it, fresh] = by_attack.try_emplace(key);
    if (fresh) {
      attack_order.push_back(key);
      attack_names[key] = {q.family, q.parameter};
    }
    it->second.push_back(s);
    auto [fit, ffresh] = by_family.try_emplace(q.family);
    if (ffresh) family_order.push_back(q.family);
    fit->second.push_back(s);
  }
  r.overall = curve_of(all);
  for (const auto& key : attack_order) {
    const auto& [family, parameter] = attack_names[key];
    r.per_attack.push_back({family, parameter, curve_of(by_attack[key])});
  }
  for (const auto& family : family_order) r.per_family.push_back({family, "all", curve_of(by_family[family])});
  if (auto it = fixed_thresholds.find(backend); it != fixed_thresholds.end()) {
    const auto rf = evaluate_threshold(all, it->second);
    r.fixed_thresholds.push_back({it->second, rf.recall, rf.fpr});
  }
  return r;
}

std::vector<BackendRun> evaluate_plan(const ImageCorpus& corpus, const SyntheticPlan& plan,
                                      const std::vector<Backend>& backends) {
  if (backends.empty()) throw InvalidInput("no backends to evaluate");
  const std::set<std::string> in_db(plan.database.begin(), plan.database.end());
  for (const auto& p : plan.positives) {
    if (!in_db.count(p)) throw InvalidInput("positive source '" + p + "' is not in the database");
  }
  for (const auto& n : plan.negatives) {
    if (in_db.count(n)) throw InvalidInput("negative source '" + n + "' is in the database");
  }
  QueryPlan qp = make_query_plan(plan.positives, plan.negatives, plan.perturbations, 0, plan.permissive);
  qp.perturb_seed = plan.seed;
  const auto fps = fingerprint_queries(qp, backends, [&](const std::string& id) { return corpus.load(id); }, plan.jobs);
  const PixelCache cache(corpus, any_pixels(backends) ? plan.database : std::vector<std::string>{}, plan.jobs);
  return match_queries(fps, plan.database, backends, [&](const std::string& id) { return cache.get(id); },
                       plan.sweep, plan.fixed_thresholds, plan.jobs);
}

std::unique_ptr<ImageCorpus> open_corpus(const ExperimentConfig& config) {
  if (config.synthetic) {
    const auto& s = *config.synthetic;
    return std::make_unique<SyntheticCorpus>(s.count, s.width, s.height, s.seed);
  }
  if (config.dataset.empty()) throw InvalidInput("config names neither a dataset directory nor a synthetic corpus");
  return std::make_unique<DirectoryCorpus>(config.dataset);
}

EmbeddingStore load_embedding_store(const ExperimentConfig& config) {
  EmbeddingStore store;
  for (const auto& path : config.embeddings) store.add(load_embeddings(path));
  return store;
}

std::vector<Backend> make_backends(const ExperimentConfig& config, const EmbeddingStore& store) {
  std::vector<Backend> out;
  for (const auto& text : config.backends) {
    BackendSpec spec = BackendSpec::parse(text);
    if (spec.kind == BackendKind::Random) spec.seed = stream_seed(config.seed, "random-backend");
    if (spec.kind == BackendKind::Embedding && !store.has_model(spec.model_id)) {
      throw DataError("no EMB1 file loaded for model '" + spec.model_id + "'");
    }
    out.emplace_back(std::move(spec), &store);
  }
  return out;
}

ExperimentResult run_synthetic(const ExperimentConfig& config) {
  config.validate();
  const auto corpus = open_corpus(config);
  const EmbeddingStore store = load_embedding_store(config);
  return run_synthetic(config, *corpus, make_backends(config, store));
}

ExperimentResult run_synthetic(const ExperimentConfig& config, const ImageCorpus& corpus,
                               const std::vector<Backend>& backends) {
  config.validate();
  ExperimentResult result;
  result.experiment = "synthetic";
  result.config = config_to_json(config);
  result.seed = config.seed;
  auto& split = result.split;
  std::tie(split.experimental, split.control) = split_dataset(corpus.ids(), stream_seed(config.seed, "split"));
  if (config.sample_count > split.control.size()) {
    throw InvalidInput("sample_count " + std::to_string(config.sample_count) + " exceeds half the dataset (" +
                       std::to_string(split.control.size()) + ")");
  }
  split.sampled_experimental = sample_ids(split.experimental, config.sample_count,
                                          stream_seed(config.seed, "sample-experimental"));
  split.sampled_control = sample_ids(split.control, config.sample_count, stream_seed(config.seed, "sample-control"));
  split.database = config.database_full_half ? split.experimental : split.sampled_experimental;

  SyntheticPlan plan;
  plan.database = split.database;
  plan.positives = split.sampled_experimental;
  plan.negatives = split.sampled_control;
  plan.perturbations = parse_perturbations(config);
  plan.seed = stream_seed(config.seed, "perturb");
  plan.permissive = config.permissive;
  plan.sweep = config.sweep;
  plan.fixed_thresholds = config.fixed_thresholds;
  plan.jobs = config.jobs;
  for (auto& run : evaluate_plan(corpus, plan, backends)) result.backends.push_back(std::move(run.result));
  result.manifest = {{"corpus", corpus.describe()},
                     {"queries", result.backends.empty() ? 0 : result.backends.front().positives +
                                                                   result.backends.front().negatives},
                     {"split", split_json(split)}};
  return result;
}

std::vector<ExperimentResult> run_scaling(const ExperimentConfig& config) {
  config.validate();
  const auto corpus = open_corpus(config);
  const EmbeddingStore store = load_embedding_store(config);
  return run_scaling(config, *corpus, make_backends(config, store));
}

std::vector<ExperimentResult> run_scaling(const ExperimentConfig& config, const ImageCorpus& corpus,
                                          const std::vector<Backend>& backends) {
  config.validate();
  SplitManifest split;
  std::tie(split.experimental, split.control) = split_dataset(corpus.ids(), stream_seed(config.seed, "split"));
  const std::size_t largest = *std::max_element(config.db_sizes.begin(), config.db_sizes.end());
  if (largest > split.experimental.size() || config.sample_count > split.control.size()) {
    throw InvalidInput("database size " + std::to_string(largest) + " needs a dataset of at least " +
                       std::to_string(2 * std::max(largest, config.sample_count)) + " images (have " +
                       std::to_string(corpus.ids().size()) + ")");
  }
  for (auto size : config.db_sizes) {
    if (size < config.sample_count) {
      throw InvalidInput("database size " + std::to_string(size) + " is smaller than the query sample (" +
                         std::to_string(config.sample_count) + ")");
    }
  }
  split.sampled_experimental = sample_ids(split.experimental, config.sample_count,
                                          stream_seed(config.seed, "sample-experimental"));
  split.sampled_control = sample_ids(split.control, config.sample_count, stream_seed(config.seed, "sample-control"));

  // Padding order is drawn once, so every database contains the smaller ones.
  std::vector<std::string> padding;
  const std::set<std::string> sampled(split.sampled_experimental.begin(), split.sampled_experimental.end());
  for (const auto& id : split.experimental) {
    if (!sampled.count(id)) padding.push_back(id);
  }
  shuffle(padding, stream_seed(config.seed, "padding"));

  const QueryPlan qp = make_query_plan(split.sampled_experimental, split.sampled_control,
                                       parse_perturbations(config), config.seed, config.permissive);
  const auto fps = fingerprint_queries(qp, backends, [&](const std::string& id) { return corpus.load(id); }, config.jobs);

  std::vector<std::string> union_ids = split.sampled_experimental;
  union_ids.insert(union_ids.end(), padding.begin(),
                   padding.begin() + static_cast<std::ptrdiff_t>(largest - config.sample_count));
  const PixelCache cache(corpus, any_pixels(backends) ? union_ids : std::vector<std::string>{}, config.jobs);

  std::vector<ExperimentResult> results;
  for (auto size : config.db_sizes) {
    ExperimentResult result;
    result.experiment = "scaling";
    result.config = config_to_json(config);
    result.seed = config.seed;
    result.database_size = size;
    result.split = split;
    result.split.database.assign(union_ids.begin(), union_ids.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(result.split.database.begin(), result.split.database.end());
    for (auto& run : match_queries(fps, result.split.database, backends,
                                   [&](const std::string& id) { return cache.get(id); }, config.sweep,
                                   config.fixed_thresholds, config.jobs)) {
      result.backends.push_back(std::move(run.result));
    }
    result.manifest = {{"corpus", corpus.describe()}, {"split", split_json(result.split)}};
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<TemplateRecord> read_template_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto split_row = [&](const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          fields.back().push_back('"');
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          fields.back().push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.emplace_back();
      } else {
        fields.back().push_back(c);
      }
    }
    if (quoted) throw DataError(path.string() + ":" + std::to_string(line_no) + ": unterminated quote");
    return fields;
  };

  std::string line;
  std::size_t line_no = 0;
  std::ptrdiff_t file_col = -1, label_col = -1;
  std::size_t columns = 0;
  std::vector<TemplateRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    const auto fields = split_row(line, line_no);
    if (file_col < 0) {
      columns = fields.size();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "image_file") file_col = static_cast<std::ptrdiff_t>(i);
        if (fields[i] == "template_label") label_col = static_cast<std::ptrdiff_t>(i);
      }
      if (file_col < 0 || label_col < 0) {
        throw DataError(path.string() + ": header must name image_file and template_label columns");
      }
      continue;
    }
    if (fields.size() != columns) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                      " fields, found " + std::to_string(fields.size()));
    }
    TemplateRecord rec{fields[static_cast<std::size_t>(file_col)], fields[static_cast<std::size_t>(label_col)]};
    if (rec.image_file.empty() || rec.label.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty image_file or template_label");
    }
    out.push_back(std::move(rec));
  }
  if (file_col < 0) throw DataError(path.string() + ": empty metadata file");
  return out;
}

ExperimentResult run_templates(const ExperimentConfig& config) {
  config.validate();
  if (config.metadata_csv.empty() || config.images_dir.empty()) {
    throw InvalidInput("the template experiment needs metadata_csv and images_dir");
  }
  const EmbeddingStore store = load_embedding_store(config);
  return run_templates(config, read_template_csv(config.metadata_csv), config.images_dir,
                       make_backends(config, store));
}

ExperimentResult run_templates(const ExperimentConfig& config, const std::vector<TemplateRecord>& records,
                               const fs::path& images_dir, const std::vector<Backend>& backends,
                               std::optional<std::vector<std::string>> experimental_labels) {
  if (records.empty()) throw InvalidInput("template metadata lists no images");
  std::vector<std::string> labels;
  std::map<std::string, std::string> template_of;
  std::set<std::string> seen_files;
  for (const auto& r : records) {
    if (!seen_files.insert(r.image_file).second) throw DataError("image '" + r.image_file + "' listed twice");
    if (template_of.emplace(r.label, r.image_file).second) labels.push_back(r.label);
  }

  std::set<std::string> experimental;
  if (experimental_labels) {
    for (const auto& l : *experimental_labels) {
      if (!template_of.count(l)) throw InvalidInput("unknown template label '" + l + "'");
      experimental.insert(l);
    }
  } else {
    auto [exp, ctl] = split_dataset(labels, stream_seed(config.seed, "template-labels"));
    experimental.insert(exp.begin(), exp.end());
  }

  const std::function<fs::path(const std::string&)> path_of = [&](const std::string& f) { return images_dir / f; };
  const bool need_pixels = any_pixels(backends);
  std::vector<std::string> missing;
  std::set<std::string> present;
  for (const auto& r : records) {
    std::error_code ec;
    if (!need_pixels || fs::is_regular_file(path_of(r.image_file), ec)) present.insert(r.image_file);
    else missing.push_back(r.image_file);
  }

  ExperimentResult result;
  result.experiment = "templates";
  result.config = config_to_json(config);
  result.seed = config.seed;
  QueryPlan qp;
  qp.unperturbed = true;
  for (const auto& label : labels) {
    const auto& tmpl = template_of[label];
    if (experimental.count(label)) {
      result.split.experimental.push_back(label);
      if (present.count(tmpl)) result.split.database.push_back(tmpl);
    } else {
      result.split.control.push_back(label);
    }
  }
  for (const auto& r : records) {
    if (!present.count(r.image_file)) continue;
    if (experimental.count(r.label)) {
      if (r.image_file == template_of[r.label]) continue;
      qp.sources.push_back({r.image_file, template_of[r.label]});
      result.split.sampled_experimental.push_back(r.image_file);
    } else {
      qp.sources.push_back({r.image_file, std::nullopt});
      result.split.sampled_control.push_back(r.image_file);
    }
  }
  if (qp.sources.empty()) throw InvalidInput("template experiment has no queries");
  std::sort(result.split.database.begin(), result.split.database.end());

  auto load = [&](const std::string& f) { return read_image(path_of(f)); };
  const auto fps = fingerprint_queries(qp, backends, load, config.jobs);
  std::map<std::string, RasterImage> db_pixels;
  if (need_pixels) {
    for (const auto& id : result.split.database) db_pixels.emplace(id, load(id));
  }
  for (auto& run : match_queries(fps, result.split.database, backends,
                                 [&](const std::string& id) -> const RasterImage* {
                                   const auto it = db_pixels.find(id);
                                   return it == db_pixels.end() ? nullptr : &it->second;
                                 },
                                 config.sweep, config.fixed_thresholds, config.jobs)) {
    result.backends.push_back(std::move(run.result));
  }
  result.manifest = {{"labels", labels.size()},
                     {"experimental_labels", result.split.experimental.size()},
                     {"control_labels", result.split.control.size()},
                     {"missing", missing},
                     {"missing_count", missing.size()}};
  return result;
}

}  // namespace simhaystack
