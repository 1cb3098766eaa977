#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "simhaystack/corpus.hpp"
#include "simhaystack/matching.hpp"
#include "simhaystack/perturb.hpp"
#include "simhaystack/roc.hpp"

namespace simhaystack {

struct SyntheticDataset {
  std::size_t count = 0;
  int width = 128;
  int height = 96;
  std::uint64_t seed = 0;
};

enum class SweepMode { Exact, Grid };

struct ThresholdSweep {
  SweepMode mode = SweepMode::Exact;
  int grid_points = 200;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path dataset;              // image directory (synthetic/scaling)
  std::optional<SyntheticDataset> synthetic;  // used instead of `dataset` when set
  std::vector<std::string> backends = {"ahash/64", "phash/64", "dhash/64", "whash/64"};
  std::vector<std::filesystem::path> embeddings;  // EMB1 files
  std::size_t sample_count = 100;
  std::uint64_t seed = 0;
  bool database_full_half = true;  // false: only the sampled experimental images
  ThresholdSweep sweep;
  std::vector<std::size_t> db_sizes = {250, 2500};
  std::map<std::string, double> fixed_thresholds;  // backend id -> eta
  std::vector<std::pair<std::string, double>> perturbations;  // empty = full suite
  bool permissive = false;
  std::filesystem::path output_dir = "results";
  int jobs = 0;
  // In-the-wild template experiment.
  std::filesystem::path metadata_csv;
  std::filesystem::path images_dir;

  /// Throws InvalidInput on an unusable configuration.
  void validate() const;
};

struct SplitManifest {
  std::vector<std::string> experimental;
  std::vector<std::string> control;
  std::vector<std::string> sampled_experimental;
  std::vector<std::string> sampled_control;
  std::vector<std::string> database;
};

/// Seeded shuffle then halve; the first half (the larger one for odd counts)
/// is the experimental group. Both halves are returned sorted.
std::pair<std::vector<std::string>, std::vector<std::string>> split_dataset(
    std::vector<std::string> ids, std::uint64_t seed);

/// `count` ids drawn without replacement, returned sorted.
std::vector<std::string> sample_ids(const std::vector<std::string>& ids, std::size_t count,
                                    std::uint64_t seed);

struct AttackCurve {
  std::string family;
  std::string parameter;  // "all" for the per-family aggregate
  RocCurve curve;
};

struct FixedThresholdResult {
  double threshold;
  double recall;
  double fpr;
};

struct Timings {
  double database_build_s = 0;
  double fingerprint_s = 0;
  double match_s = 0;
};

struct BackendResult {
  std::string backend;
  std::size_t database_size = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  RocCurve overall;
  std::vector<AttackCurve> per_attack;  // family x parameter
  std::vector<AttackCurve> per_family;
  std::vector<FixedThresholdResult> fixed_thresholds;
  Timings timings;
};

struct ExperimentResult {
  std::string experiment;  // synthetic | scaling | templates
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::optional<std::size_t> database_size;  // scaling runs
  SplitManifest split;
  std::vector<BackendResult> backends;
  nlohmann::json manifest = nlohmann::json::object();  // experiment-specific extras

  const BackendResult* find(std::string_view backend) const;
};

/// What run_synthetic evaluates, with every source decided up front. Exposed
/// so tests and tools can drive the engine with their own corpora/backends.
struct SyntheticPlan {
  std::vector<std::string> database;
  std::vector<std::string> positives;  // sources in the database
  std::vector<std::string> negatives;  // sources not in the database
  std::vector<std::pair<PerturbationFamily, double>> perturbations;  // empty = full suite
  std::uint64_t seed = 0;
  bool permissive = false;
  ThresholdSweep sweep;
  std::map<std::string, double> fixed_thresholds;
  int jobs = 0;
};

/// Reduced per-query outcome kept for every backend.
struct QueryRecord {
  std::string query_id;
  std::string source_id;
  std::string family;
  std::string parameter;
  bool positive = false;
  std::optional<Match> nearest;
};

struct BackendRun {
  BackendResult result;
  std::vector<QueryRecord> queries;
};

/// Perturb every plan source, fingerprint, match against the database and
/// sweep thresholds, once per backend.
std::vector<BackendRun> evaluate_plan(const ImageCorpus& corpus, const SyntheticPlan& plan,
                                      const std::vector<Backend>& backends);

/// Summarise query records into ROC curves (overall, per attack, per family).
BackendResult summarise(const std::string& backend, std::span<const QueryRecord> queries,
                        const ThresholdSweep& sweep,
                        const std::map<std::string, double>& fixed_thresholds);

ScoredQuery score(const QueryRecord& q);

std::unique_ptr<ImageCorpus> open_corpus(const ExperimentConfig& config);
EmbeddingStore load_embedding_store(const ExperimentConfig& config);
std::vector<Backend> make_backends(const ExperimentConfig& config, const EmbeddingStore& store);

ExperimentResult run_synthetic(const ExperimentConfig& config);
ExperimentResult run_synthetic(const ExperimentConfig& config, const ImageCorpus& corpus,
                               const std::vector<Backend>& backends);

std::vector<ExperimentResult> run_scaling(const ExperimentConfig& config);
std::vector<ExperimentResult> run_scaling(const ExperimentConfig& config,
                                          const ImageCorpus& corpus,
                                          const std::vector<Backend>& backends);

/// One `image_file,template_label` row.
struct TemplateRecord {
  std::string image_file;
  std::string label;
};

std::vector<TemplateRecord> read_template_csv(const std::filesystem::path& path);

/// In-the-wild template matching. The first row of each label is its
/// template. `experimental_labels` overrides the seeded label split.
ExperimentResult run_templates(const ExperimentConfig& config);
ExperimentResult run_templates(const ExperimentConfig& config,
                               const std::vector<TemplateRecord>& records,
                               const std::filesystem::path& images_dir,
                               const std::vector<Backend>& backends,
                               std::optional<std::vector<std::string>> experimental_labels = {});

}  // namespace simhaystack
