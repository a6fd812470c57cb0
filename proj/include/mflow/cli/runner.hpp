#pragma once

// Subcommand implementations. Each returns a Record; main_entry maps records
// and errors to exit codes (0 pass, 1 check failure, 2 config error).

#include <iosfwd>
#include <string>

#include "mflow/cli/records.hpp"

namespace mflow::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

Record run_spectrum(const ExperimentConfig& cfg);
Record run_sample(const ExperimentConfig& cfg);
/// chain-rule | quarter | ibp | jump-bound | lip | k-functional | separation |
/// density-bound | lsi | hyper | cdx
Record run_check(const std::string& name, const ExperimentConfig& cfg);
Record run_form(const ExperimentConfig& cfg);
Record run_flow(const ExperimentConfig& cfg);

/// Reads every record in out_dir and prints a summary table. Returns the exit code.
int run_report(const std::string& out_dir, std::ostream& os);

/// min over tau >= 0 of sum_i w_i (|g_i| - tau)^+ + tau.
double k_functional_threshold(const Vec& g, const Vec& w);

int main_entry(int argc, char** argv);

}  // namespace mflow::cli
