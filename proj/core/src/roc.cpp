#include "simhaystack/roc.hpp"

#include <algorithm>
#include <cmath>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace {

// A query with no negatives at all still reports a false positive rate of 1
// when some positive landed on the wrong id.
RecallFpr rates(std::size_t positives, std::size_t negatives, std::size_t correct, std::size_t false_hits) {
  RecallFpr r;
  r.recall = positives == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(positives);
  if (negatives == 0) {
    r.fpr = false_hits > 0 ? 1.0 : 0.0;
  } else {
    r.fpr = std::min(1.0, static_cast<double>(false_hits) / static_cast<double>(negatives));
  }
  return r;
}

double trapezoid(std::span<const RocPoint> points) {
  double area = 0.0;
  double px = 0.0;
  double py = 0.0;
  for (const auto& p : points) {
    area += (p.fpr - px) * (p.recall + py) * 0.5;
    px = p.fpr;
    py = p.recall;
  }
  area += (1.0 - px) * (1.0 + py) * 0.5;
  return area;
}

}  // namespace

RecallFpr recall_fpr(std::span<const std::optional<std::string>> matches,
                     std::span<const std::optional<std::string>> truth) {
  if (matches.size() != truth.size()) throw InvalidInput("recall_fpr: matches and ground truth differ in length");
  if (truth.empty()) throw InvalidInput("recall_fpr: empty ground truth");
  std::size_t positives = 0, negatives = 0, correct = 0, false_hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++positives;
      if (matches[i] && *matches[i] == *truth[i]) ++correct;
      else if (matches[i]) ++false_hits;
    } else {
      ++negatives;
      if (matches[i]) ++false_hits;
    }
  }
  return rates(positives, negatives, correct, false_hits);
}

std::vector<double> exact_thresholds(std::span<const ScoredQuery> queries) {
  std::vector<double> t;
  t.reserve(queries.size());
  for (const auto& q : queries) {
    if (std::isfinite(q.distance)) t.push_back(q.distance);
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

std::vector<double> grid_thresholds(std::span<const ScoredQuery> queries, int points) {
  if (points < 2) throw InvalidInput("a threshold grid needs at least 2 points");
  double top = 0.0;
  for (const auto& q : queries) {
    if (std::isfinite(q.distance)) top = std::max(top, q.distance);
  }
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) t[i] = i + 1 == points ? top : top * i / (points - 1);
  return t;
}

RecallFpr evaluate_threshold(std::span<const ScoredQuery> queries, double threshold) {
  if (queries.empty()) throw InvalidInput("no queries to evaluate");
  std::size_t positives = 0, negatives = 0, correct = 0, false_hits = 0;
  for (const auto& q : queries) {
    const bool hit = q.distance <= threshold;
    if (q.positive) {
      ++positives;
      if (hit && q.correct) ++correct;
      else if (hit) ++false_hits;
    } else {
      ++negatives;
      if (hit) ++false_hits;
    }
  }
  return rates(positives, negatives, correct, false_hits);
}

RocCurve build_roc(std::span<const ScoredQuery> queries, std::span<const double> thresholds) {
  if (queries.empty()) throw InvalidInput("no queries to evaluate");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw InvalidInput("thresholds must be ascending");
  std::vector<const ScoredQuery*> order;
  order.reserve(queries.size());
  std::size_t positives = 0;
  for (const auto& q : queries) {
    order.push_back(&q);
    positives += q.positive ? 1 : 0;
  }
  const std::size_t negatives = queries.size() - positives;
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->distance < b->distance; });

  RocCurve curve;
  curve.points.reserve(thresholds.size());
  std::size_t next = 0, correct = 0, false_hits = 0;
  for (double t : thresholds) {
    while (next < order.size() && order[next]->distance <= t) {
      const auto& q = *order[next++];
      if (q.positive && q.correct) ++correct;
      else ++false_hits;
    }
    const auto r = rates(positives, negatives, correct, false_hits);
    curve.points.push_back({t, r.fpr, r.recall});
  }
  curve.auc = trapezoid(curve.points);
  return curve;
}

double auc(std::span<const RocPoint> points) {
  if (points.size() < 2) throw InvalidInput("auc needs at least 2 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.fpr >= 0 && p.fpr <= 1 && p.recall >= 0 && p.recall <= 1)) {
      throw InvalidInput("ROC point outside the unit square");
    }
    if (i > 0) {
      const auto& q = points[i - 1];
      if (p.threshold < q.threshold || p.fpr < q.fpr || p.recall < q.recall) {
        throw InvalidInput("ROC points are not sorted");
      }
    }
  }
  return trapezoid(points);
}

}  // namespace simhaystack
