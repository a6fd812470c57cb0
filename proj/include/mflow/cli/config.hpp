#pragma once

// Experiment configuration: a JSON file validated against a fixed key table,
// with seed and output directory overridable from the environment and flags.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mflow/flow.hpp"

namespace mflow::cli {

using json = nlohmann::json;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::size_t> chunk;
};

struct ExperimentConfig {
  json raw;  // validated document, defaults not filled in
  SpectralConfig spectral;
  PotentialSpec pot = potential_none();
  std::uint64_t seed = 1;
  std::string out = "out";
  ExecPolicy exec{};
  std::string hash;  // FNV-1a 64 of the canonical document, hex

  const json& section(const char* name) const;
};

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(const std::string& bytes);

/// Throws ConfigError naming the offending key.
void validate_schema(const json& doc);

/// Parses and validates. Precedence for seed and out: flag, then
/// MFLOW_SEED / MFLOW_OUT, then the file.
ExperimentConfig load_config(const std::string& path, const Overrides& ov);
ExperimentConfig config_from_json(const json& doc, const Overrides& ov);

PotentialSpec parse_potential(const json& j, int d);
CylinderFunction parse_cylinder(const json& j, int d);
Mode parse_mode(const std::string& s);

}  // namespace mflow::cli
