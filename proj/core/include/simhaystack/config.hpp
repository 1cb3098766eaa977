#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "simhaystack/bench.hpp"

namespace simhaystack {

/// Parse a YAML experiment description. Relative dataset paths are resolved
/// against the config's directory, then against $SIMHAYSTACK_DATA.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view yaml_text,
                              const std::filesystem::path& base_dir = {});

/// Resolve a dataset path: absolute paths and paths that exist relative to
/// base_dir win, then $SIMHAYSTACK_DATA/<path>.
std::filesystem::path resolve_data_path(const std::filesystem::path& path,
                                        const std::filesystem::path& base_dir);

nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace simhaystack
