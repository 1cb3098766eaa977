#include "roc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace simhaystack::testing {

OracleRoc brute_force_roc(const std::vector<std::string>& database_ids, const std::vector<OracleQuery>& queries,
                          const std::vector<double>& thresholds) {
  OracleRoc roc;
  for (const auto& q : queries) (q.truth ? roc.positives : roc.negatives)++;
  for (double t : thresholds) {
    OraclePoint p{t, 0, 0, 0, 0};
    for (const auto& q : queries) {
      const std::string* chosen = nullptr;
      double best = 0;
      for (std::size_t i = 0; i < database_ids.size(); ++i) {
        const double d = q.distances[i];
        if (!(d <= t)) continue;
        if (chosen == nullptr || d < best || (d == best && database_ids[i] < *chosen)) {
          chosen = &database_ids[i];
          best = d;
        }
      }
      if (chosen == nullptr) continue;
      if (q.truth && *q.truth == *chosen) {
        ++p.correct;
      } else {
        ++p.false_hits;
      }
    }
    p.recall = roc.positives == 0 ? 0.0 : static_cast<double>(p.correct) / static_cast<double>(roc.positives);
    if (roc.negatives == 0) {
      p.fpr = p.false_hits == 0 ? 0.0 : 1.0;
    } else {
      p.fpr = std::min(1.0, static_cast<double>(p.false_hits) / static_cast<double>(roc.negatives));
    }
    roc.points.push_back(p);
  }
  // trapezoids from (0, 0) through every point to (1, 1)
  double x = 0, y = 0;
  for (const auto& p : roc.points) {
    roc.auc += (p.fpr - x) * (p.recall + y) / 2;
    x = p.fpr;
    y = p.recall;
  }
  roc.auc += (1 - x) * (1 + y) / 2;
  return roc;
}

std::vector<double> all_pair_thresholds(const std::vector<OracleQuery>& queries) {
  std::set<double> t;
  for (const auto& q : queries) {
    for (double d : q.distances) {
      if (std::isfinite(d)) t.insert(d);
    }
  }
  return {t.begin(), t.end()};
}

}  // namespace simhaystack::testing
