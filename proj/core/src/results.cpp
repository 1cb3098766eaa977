#include "simhaystack/results.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "simhaystack/error.hpp"
#include "simhaystack/perturb.hpp"

namespace simhaystack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json split_to_json(const SplitManifest& s) {
  return {{"experimental", s.experimental},
          {"control", s.control},
          {"sampled_experimental", s.sampled_experimental},
          {"sampled_control", s.sampled_control},
          {"database", s.database}};
}

json attack_to_json(const AttackCurve& a) {
  json j = roc_to_json(a.curve);
  j["family"] = a.family;
  j["parameter"] = a.parameter;
  return j;
}

json auc_summary(const std::vector<BackendResult>& backends) {
  json table = json::object();
  for (const auto& b : backends) {
    json row;
    row["overall"] = b.overall.auc;
    for (const auto& f : b.per_family) row["families"][f.family] = f.curve.auc;
    for (const auto& a : b.per_attack) row["attacks"][a.family + "/" + a.parameter] = a.curve.auc;
    table[b.backend] = std::move(row);
  }
  return table;
}

std::string file_safe(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  }
  return s;
}

// Runs of a document: the document itself, or each member of "runs".
std::vector<const json*> runs_of(const json& doc) {
  std::vector<const json*> out;
  if (doc.contains("runs") && doc["runs"].is_array()) {
    for (const auto& r : doc["runs"]) out.push_back(&r);
  } else {
    out.push_back(&doc);
  }
  return out;
}

std::string run_prefix(const json& run) {
  std::string prefix = run.value("experiment", std::string("run"));
  if (run.contains("database_size")) prefix += "_db" + std::to_string(run["database_size"].get<std::size_t>());
  return prefix;
}

void verify_curve(const json& c, const std::string& where, std::vector<std::string>& errors) {
  if (!c.is_object() || !c.contains("auc") || !c.contains("points") || !c["points"].is_array() ||
      !c["auc"].is_number()) {
    errors.push_back(where + ": curve needs numeric 'auc' and a 'points' array");
    return;
  }
  std::vector<RocPoint> points;
  for (const auto& p : c["points"]) {
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number()) {
      errors.push_back(where + ": points must be [threshold, fpr, recall]");
      return;
    }
    points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.fpr >= 0 && p.fpr <= 1 && p.recall >= 0 && p.recall <= 1)) {
      errors.push_back(where + ": point " + std::to_string(i) + " lies outside the unit square");
      return;
    }
    if (i > 0) {
      const auto& q = points[i - 1];
      if (p.threshold < q.threshold) errors.push_back(where + ": thresholds decrease at point " + std::to_string(i));
      if (p.fpr < q.fpr) errors.push_back(where + ": FPR decreases at point " + std::to_string(i));
      if (p.recall < q.recall) errors.push_back(where + ": recall decreases at point " + std::to_string(i));
    }
  }
  const double stated = c["auc"].get<double>();
  if (!(stated >= 0 && stated <= 1)) errors.push_back(where + ": auc outside [0, 1]");
  double area = 0, px = 0, py = 0;
  for (const auto& p : points) {
    area += (p.fpr - px) * (p.recall + py) * 0.5;
    px = p.fpr;
    py = p.recall;
  }
  area += (1 - px) * (1 + py) * 0.5;
  if (std::abs(area - stated) > 1e-9) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ": auc %.12g does not match its points (%.12g)", stated, area);
    errors.push_back(where + buf);
  }
}

void verify_run(const json& run, const std::string& where, std::vector<std::string>& errors) {
  for (const char* key : {"experiment", "config", "split", "backends"}) {
    if (!run.contains(key)) errors.push_back(where + "missing '" + key + "'");
  }
  if (!run.contains("backends") || !run["backends"].is_array()) return;
  if (run["backends"].empty()) errors.push_back(where + "no backends");
  const bool full_suite = run.value("experiment", std::string()) != "templates" && run.contains("config") &&
                          run["config"].is_object() && run["config"].value("perturbations", json::array()).empty();
  for (std::size_t i = 0; i < run["backends"].size(); ++i) {
    const json& b = run["backends"][i];
    const std::string at = where + "backends[" + std::to_string(i) + "]";
    if (!b.is_object() || !b.contains("backend") || !b["backend"].is_string()) {
      errors.push_back(at + ": missing backend id");
      continue;
    }
    const std::string bat = at + " (" + b["backend"].get<std::string>() + ")";
    if (!b.contains("overall")) errors.push_back(bat + ": missing overall curve");
    else verify_curve(b["overall"], bat + ".overall", errors);
    std::set<std::string> families;
    for (const char* group : {"per_attack", "per_family"}) {
      if (!b.contains(group) || !b[group].is_array()) {
        errors.push_back(bat + ": missing " + group);
        continue;
      }
      for (std::size_t k = 0; k < b[group].size(); ++k) {
        const json& c = b[group][k];
        verify_curve(c, bat + "." + group + "[" + std::to_string(k) + "]", errors);
        if (c.contains("family") && c["family"].is_string()) families.insert(c["family"].get<std::string>());
      }
    }
    if (full_suite) {
      for (int f = 0; f < kPerturbationFamilyCount; ++f) {
        const auto name = std::string(to_string(static_cast<PerturbationFamily>(f)));
        if (!families.count(name)) errors.push_back(bat + ": perturbation family " + name + " missing");
      }
    }
    if (b.contains("timings")) {
      for (const auto& [k, v] : b["timings"].items()) {
        if (!v.is_number() || v.get<double>() < 0) errors.push_back(bat + ": timing '" + k + "' is not a duration");
      }
    }
  }
}

}  // namespace

json roc_to_json(const RocCurve& curve) {
  json points = json::array();
  for (const auto& p : curve.points) points.push_back(json::array({p.threshold, p.fpr, p.recall}));
  return {{"auc", curve.auc}, {"points", std::move(points)}};
}

json backend_result_to_json(const BackendResult& r) {
  json j;
  j["backend"] = r.backend;
  j["database_size"] = r.database_size;
  j["positives"] = r.positives;
  j["negatives"] = r.negatives;
  j["overall"] = roc_to_json(r.overall);
  auto& attacks = j["per_attack"] = json::array();
  for (const auto& a : r.per_attack) attacks.push_back(attack_to_json(a));
  auto& families = j["per_family"] = json::array();
  for (const auto& a : r.per_family) families.push_back(attack_to_json(a));
  auto& fixed = j["fixed_thresholds"] = json::array();
  for (const auto& f : r.fixed_thresholds) fixed.push_back({{"threshold", f.threshold}, {"recall", f.recall}, {"fpr", f.fpr}});
  j["timings"] = {{"database_build_s", r.timings.database_build_s},
                  {"fingerprint_s", r.timings.fingerprint_s},
                  {"match_s", r.timings.match_s}};
  return j;
}

json result_to_json(const ExperimentResult& r) {
  json j;
  j["result_version"] = kResultVersion;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  if (r.database_size) j["database_size"] = *r.database_size;
  j["config"] = r.config;
  j["split"] = split_to_json(r.split);
  j["manifest"] = r.manifest;
  j["auc_table"] = auc_summary(r.backends);
  auto& backends = j["backends"] = json::array();
  for (const auto& b : r.backends) backends.push_back(backend_result_to_json(b));
  return j;
}

json scaling_to_json(const std::vector<ExperimentResult>& results) {
  json j;
  j["result_version"] = kResultVersion;
  j["experiment"] = "scaling";
  if (!results.empty()) {
    j["seed"] = results.front().seed;
    j["config"] = results.front().config;
  }
  auto& runs = j["runs"] = json::array();
  for (const auto& r : results) runs.push_back(result_to_json(r));
  return j;
}

json redact_timings(const json& doc) {
  if (doc.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : doc.items()) {
      if (k != "timings") out[k] = redact_timings(v);
    }
    return out;
  }
  if (doc.is_array()) {
    json out = json::array();
    for (const auto& v : doc) out.push_back(redact_timings(v));
    return out;
  }
  return doc;
}

void write_json(const json& doc, const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

VerifyReport verify_results(const json& doc) {
  VerifyReport report;
  if (!doc.is_object()) {
    report.errors.push_back("document is not a JSON object");
    return report;
  }
  if (!doc.contains("result_version") || doc["result_version"] != kResultVersion) {
    report.errors.push_back("result_version must be " + std::to_string(kResultVersion));
  }
  if (doc.contains("runs")) {
    if (!doc["runs"].is_array() || doc["runs"].empty()) {
      report.errors.push_back("'runs' must be a non-empty array");
      return report;
    }
    for (std::size_t i = 0; i < doc["runs"].size(); ++i) {
      verify_run(doc["runs"][i], "runs[" + std::to_string(i) + "].", report.errors);
    }
  } else {
    verify_run(doc, "", report.errors);
  }
  return report;
}

std::string auc_table(const json& doc) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %10s %10s %10s\n", "backend", "database", "queries", "auc");
  out << line;
  for (const json* run : runs_of(doc)) {
    for (const auto& b : run->value("backends", json::array())) {
      const std::size_t queries = b.value("positives", std::size_t{0}) + b.value("negatives", std::size_t{0});
      std::snprintf(line, sizeof line, "%-32s %10zu %10zu %10.4f\n", b.value("backend", std::string("?")).c_str(),
                    b.value("database_size", std::size_t{0}), queries, b["overall"].value("auc", 0.0));
      out << line;
    }
  }
  return out.str();
}

std::vector<fs::path> export_plots(const json& doc, const fs::path& out_dir, bool svg) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  auto write_csv = [&](const fs::path& path, const json& curve) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "threshold,fpr,recall\n";
    char buf[96];
    for (const auto& p : curve.at("points")) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      out << buf;
    }
    written.push_back(path);
  };

  static constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  try {
    for (const json* run : runs_of(doc)) {
      const std::string prefix = run_prefix(*run);
      const auto& backends = run->at("backends");
      for (const auto& b : backends) {
        const std::string stem = prefix + "_" + file_safe(b.at("backend").get<std::string>());
        write_csv(out_dir / (stem + "_overall.csv"), b.at("overall"));
        for (const auto& a : b.at("per_attack")) {
          write_csv(out_dir / (stem + "_" + file_safe(a.at("family").get<std::string>() + "_" +
                                                      a.at("parameter").get<std::string>()) + ".csv"),
                    a);
        }
      }
      if (!svg) continue;
      const fs::path path = out_dir / (prefix + "_roc.svg");
      std::ofstream out(path);
      if (!out) throw DataError("cannot write " + path.string());
      constexpr double kSize = 400, kPad = 50;
      out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kPad + 160 << "\" height=\""
          << kSize + 2 * kPad << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
      out << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
          << "\" fill=\"none\" stroke=\"#000\"/>\n";
      out << "<line x1=\"" << kPad << "\" y1=\"" << kPad + kSize << "\" x2=\"" << kPad + kSize << "\" y2=\"" << kPad
          << "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
      out << "<text x=\"" << kPad + kSize / 2 << "\" y=\"" << kSize + 2 * kPad - 12
          << "\" text-anchor=\"middle\">false positive rate</text>\n";
      out << "<text x=\"14\" y=\"" << kPad + kSize / 2 << "\" transform=\"rotate(-90 14 " << kPad + kSize / 2
          << ")\" text-anchor=\"middle\">recall</text>\n";
      std::size_t k = 0;
      for (const auto& b : backends) {
        const char* colour = kPalette[k % std::size(kPalette)];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"" << kPad << ','
            << kPad + kSize;
        char buf[64];
        for (const auto& p : b.at("overall").at("points")) {
          std::snprintf(buf, sizeof buf, " %.2f,%.2f", kPad + kSize * p[1].get<double>(),
                        kPad + kSize * (1 - p[2].get<double>()));
          out << buf;
        }
        out << ' ' << kPad + kSize << ',' << kPad << "\"/>\n";
        std::snprintf(buf, sizeof buf, "%.3f", b.at("overall").at("auc").get<double>());
        out << "<text x=\"" << 2 * kPad + kSize - 30 << "\" y=\"" << kPad + 16 * (k + 1) << "\" fill=\"" << colour
            << "\">" << b.at("backend").get<std::string>() << " (" << buf << ")</text>\n";
        ++k;
      }
      out << "</svg>\n";
      written.push_back(path);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("results document is malformed: ") + e.what());
  }
  return written;
}

}  // namespace simhaystack
