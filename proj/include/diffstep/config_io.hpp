#pragma once

// JSON (de)serialization of SystemConfig and SweepSpec.
//
// Keys mirror the C++ field names. Missing keys keep their defaults, unknown
// keys and type mismatches raise ConfigError naming the offending path.

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "diffstep/experiments.hpp"
#include "diffstep/model.hpp"

namespace diffstep {

nlohmann::ordered_json config_to_json(const SystemConfig& config);
SystemConfig config_from_json(const nlohmann::json& j);

nlohmann::ordered_json sweep_to_json(const SweepSpec& spec);
SweepSpec sweep_from_json(const nlohmann::json& j);

/// A sweep file holds one spec object or an array of them.
std::vector<SweepSpec> sweeps_from_json(const nlohmann::json& j);

/// Parses a file; syntax errors become ConfigError on field "<file>".
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace diffstep
