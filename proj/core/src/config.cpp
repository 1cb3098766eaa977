#include "simhaystack/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "simhaystack/error.hpp"

namespace simhaystack {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKnownKeys = {
    "name",         "experiment",  "dataset",    "synthetic", "backends",   "embeddings",
    "sample_count", "seed",        "database",   "sweep",     "db_sizes",   "fixed_thresholds",
    "perturbations", "permissive", "output_dir", "jobs",      "metadata_csv", "images_dir",
};

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InvalidInput("config key '" + key + "' has an invalid value");
  }
}

}  // namespace

fs::path resolve_data_path(const fs::path& path, const fs::path& base_dir) {
  if (path.empty() || path.is_absolute()) return path;
  std::error_code ec;
  const fs::path local = base_dir / path;
  if (fs::exists(local, ec)) return local;
  if (const char* root = std::getenv("SIMHAYSTACK_DATA"); root && *root) {
    const fs::path shared = fs::path(root) / path;
    if (fs::exists(shared, ec)) return shared;
  }
  return local;
}

ExperimentConfig parse_config(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw DataError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw InvalidInput("config must be a mapping of keys to values");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKnownKeys.count(key)) throw InvalidInput("unknown config key '" + key + "'");
  }

  ExperimentConfig cfg;
  if (auto n = root["name"]) cfg.name = scalar<std::string>(n, "name");
  if (auto n = root["dataset"]) cfg.dataset = resolve_data_path(scalar<std::string>(n, "dataset"), base_dir);
  if (auto n = root["synthetic"]) {
    if (!n.IsMap()) throw InvalidInput("config key 'synthetic' must be a mapping");
    SyntheticDataset s;
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (key == "count") s.count = scalar<std::size_t>(kv.second, "synthetic.count");
      else if (key == "width") s.width = scalar<int>(kv.second, "synthetic.width");
      else if (key == "height") s.height = scalar<int>(kv.second, "synthetic.height");
      else if (key == "seed") s.seed = scalar<std::uint64_t>(kv.second, "synthetic.seed");
      else throw InvalidInput("unknown config key 'synthetic." + key + "'");
    }
    cfg.synthetic = s;
  }
  if (auto n = root["backends"]) {
    if (!n.IsSequence()) throw InvalidInput("config key 'backends' must be a list");
    cfg.backends.clear();
    for (const auto& b : n) cfg.backends.push_back(scalar<std::string>(b, "backends"));
  }
  if (auto n = root["embeddings"]) {
    if (!n.IsSequence()) throw InvalidInput("config key 'embeddings' must be a list");
    for (const auto& e : n) cfg.embeddings.push_back(resolve_data_path(scalar<std::string>(e, "embeddings"), base_dir));
  }
  if (auto n = root["sample_count"]) cfg.sample_count = scalar<std::size_t>(n, "sample_count");
  if (auto n = root["seed"]) cfg.seed = scalar<std::uint64_t>(n, "seed");
  if (auto n = root["database"]) {
    const auto v = scalar<std::string>(n, "database");
    if (v == "full_half") cfg.database_full_half = true;
    else if (v == "sampled") cfg.database_full_half = false;
    else throw InvalidInput("config key 'database' must be full_half or sampled");
  }
  if (auto n = root["sweep"]) {
    std::string mode;
    if (n.IsScalar()) {
      mode = scalar<std::string>(n, "sweep");
    } else if (n.IsMap()) {
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (key == "mode") mode = scalar<std::string>(kv.second, "sweep.mode");
        else if (key == "points") cfg.sweep.grid_points = scalar<int>(kv.second, "sweep.points");
        else throw InvalidInput("unknown config key 'sweep." + key + "'");
      }
    } else {
      throw InvalidInput("config key 'sweep' must be exact, grid or a mapping");
    }
    if (mode == "exact") cfg.sweep.mode = SweepMode::Exact;
    else if (mode == "grid") cfg.sweep.mode = SweepMode::Grid;
    else throw InvalidInput("sweep mode must be exact or grid");
  }
  if (auto n = root["db_sizes"]) {
    if (!n.IsSequence()) throw InvalidInput("config key 'db_sizes' must be a list");
    cfg.db_sizes.clear();
    for (const auto& s : n) cfg.db_sizes.push_back(scalar<std::size_t>(s, "db_sizes"));
  }
  if (auto n = root["fixed_thresholds"]) {
    if (!n.IsMap()) throw InvalidInput("config key 'fixed_thresholds' must map backend ids to thresholds");
    for (const auto& kv : n) {
      cfg.fixed_thresholds[kv.first.as<std::string>()] = scalar<double>(kv.second, "fixed_thresholds");
    }
  }
  if (auto n = root["perturbations"]) {
    if (n.IsScalar() && n.as<std::string>() == "all") {
      cfg.perturbations.clear();
    } else if (n.IsSequence()) {
      for (const auto& p : n) {
        if (!p.IsMap() || !p["family"] || !p["parameter"]) {
          throw InvalidInput("each perturbation needs a family and a parameter");
        }
        cfg.perturbations.emplace_back(scalar<std::string>(p["family"], "perturbations.family"),
                                       scalar<double>(p["parameter"], "perturbations.parameter"));
      }
    } else {
      throw InvalidInput("config key 'perturbations' must be 'all' or a list");
    }
  }
  if (auto n = root["permissive"]) cfg.permissive = scalar<bool>(n, "permissive");
  if (auto n = root["output_dir"]) cfg.output_dir = scalar<std::string>(n, "output_dir");
  if (auto n = root["jobs"]) cfg.jobs = scalar<int>(n, "jobs");
  if (auto n = root["metadata_csv"]) cfg.metadata_csv = resolve_data_path(scalar<std::string>(n, "metadata_csv"), base_dir);
  if (auto n = root["images_dir"]) cfg.images_dir = resolve_data_path(scalar<std::string>(n, "images_dir"), base_dir);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), path.parent_path());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["name"] = config.name;
  if (config.synthetic) {
    j["synthetic"] = {{"count", config.synthetic->count},
                      {"width", config.synthetic->width},
                      {"height", config.synthetic->height},
                      {"seed", config.synthetic->seed}};
  } else if (!config.dataset.empty()) {
    j["dataset"] = config.dataset.generic_string();
  }
  j["backends"] = config.backends;
  auto& emb = j["embeddings"] = nlohmann::json::array();
  for (const auto& e : config.embeddings) emb.push_back(e.generic_string());
  j["sample_count"] = config.sample_count;
  j["seed"] = config.seed;
  j["database"] = config.database_full_half ? "full_half" : "sampled";
  j["sweep"] = {{"mode", config.sweep.mode == SweepMode::Exact ? "exact" : "grid"},
                {"points", config.sweep.grid_points}};
  j["db_sizes"] = config.db_sizes;
  j["fixed_thresholds"] = config.fixed_thresholds;
  auto& perts = j["perturbations"] = nlohmann::json::array();
  for (const auto& [family, p] : config.perturbations) perts.push_back({{"family", family}, {"parameter", p}});
  j["permissive"] = config.permissive;
  if (!config.metadata_csv.empty()) j["metadata_csv"] = config.metadata_csv.generic_string();
  if (!config.images_dir.empty()) j["images_dir"] = config.images_dir.generic_string();
  return j;
}

}  // namespace simhaystack
