#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simhaystack/bench.hpp"

namespace simhaystack {

inline constexpr int kResultVersion = 1;

nlohmann::json roc_to_json(const RocCurve& curve);
nlohmann::json backend_result_to_json(const BackendResult& result);
nlohmann::json result_to_json(const ExperimentResult& result);
/// A scaling run: one document holding every database size.
nlohmann::json scaling_to_json(const std::vector<ExperimentResult>& results);

/// Copy with every "timings" member removed, for run-to-run comparison.
nlohmann::json redact_timings(const nlohmann::json& doc);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

struct VerifyReport {
  std::vector<std::string> errors;
  bool ok() const noexcept { return errors.empty(); }
};

/// Schema version, required members, ROC monotonicity and AUC consistency.
VerifyReport verify_results(const nlohmann::json& doc);

/// Plain-text AUC table (one row per backend).
std::string auc_table(const nlohmann::json& doc);

/// Writes one CSV per curve (threshold,fpr,recall) and, optionally, one SVG
/// line plot per experiment. Returns the files written.
std::vector<std::filesystem::path> export_plots(const nlohmann::json& doc,
                                                const std::filesystem::path& out_dir,
                                                bool svg);

}  // namespace simhaystack
