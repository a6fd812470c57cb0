#pragma once

// Machine-readable output records. Every numeric claim carries its tolerance
// and a provenance tag: "formula", "oracle" or "mc".

#include <string>
#include <vector>

#include "mflow/cli/config.hpp"

namespace mflow::cli {

struct Claim {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation = "<=";  // value <relation> tolerance
  std::string provenance;
  bool pass = true;
};

struct Record {
  std::string command;
  std::vector<Claim> claims;
  json data = json::object();

  bool passed() const;
  /// Adds a claim "value <= tolerance" and returns whether it holds.
  bool expect_le(const std::string& name, double value, double tolerance, const std::string& provenance);
  /// Adds an informational claim with no pass condition.
  void note(const std::string& name, double value, const std::string& provenance);
};

json to_json(const Record& r, const ExperimentConfig& cfg);

/// Writes <out>/<file>.json, creating the directory.
std::string write_record(const Record& r, const ExperimentConfig& cfg, const std::string& file);

/// Writes rows to <out>/<file>.csv with a header line; 17 significant digits.
std::string write_csv(const ExperimentConfig& cfg, const std::string& file, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

/// One line per claim, failing claims marked.
void print_record(const Record& r, std::ostream& os);

}  // namespace mflow::cli
