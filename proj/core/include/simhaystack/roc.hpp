#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simhaystack {

struct RecallFpr {
  double recall = 0;
  double fpr = 0;
};

/// matches[i]: id query i was matched to (if any); truth[i]: its true source
/// id for positives, nullopt for negatives. A positive matched to the wrong
/// id is both a miss and a false positive; fpr is capped at 1. Throws
/// InvalidInput on size mismatch or empty input.
RecallFpr recall_fpr(std::span<const std::optional<std::string>> matches,
                     std::span<const std::optional<std::string>> truth);

/// One evaluated query reduced to what the threshold sweep needs.
struct ScoredQuery {
  double distance;  // distance to the nearest database entry, +inf if none
  bool positive;    // has a true source in the database
  bool correct;     // nearest entry is the true source
};

struct RocPoint {
  double threshold;
  double fpr;
  double recall;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ascending threshold
  double auc = 0;
};

/// Every distinct finite distance, ascending.
std::vector<double> exact_thresholds(std::span<const ScoredQuery> queries);
/// `points` evenly spaced thresholds over [0, max finite distance].
std::vector<double> grid_thresholds(std::span<const ScoredQuery> queries, int points = 200);

/// Recall and FPR at a single threshold (distance <= threshold matches).
RecallFpr evaluate_threshold(std::span<const ScoredQuery> queries, double threshold);

/// ROC over ascending thresholds, with its AUC.
RocCurve build_roc(std::span<const ScoredQuery> queries, std::span<const double> thresholds);

/// Trapezoidal area over FPR after prepending (0,0) and appending (1,1).
/// Needs >= 2 points, ordered by threshold with nondecreasing FPR and recall.
double auc(std::span<const RocPoint> points);

}  // namespace simhaystack
