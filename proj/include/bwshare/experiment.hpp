#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bwshare/config.hpp"
#include "bwshare/report.hpp"

namespace bwshare {

struct CliOverrides {
  std::optional<std::string> policy;
  std::optional<uint64_t> seed;
  std::optional<int> horizon;
  std::optional<std::string> out_dir;
  std::optional<std::string> detail;
};

// Applies command-line overrides onto a loaded config. Throws ConfigError on
// invalid values.
void apply_overrides(ExperimentConfig& cfg, const CliOverrides& overrides);

// Runs the configured policy and writes hyperperiod.csv, clients.csv,
// periods.csv (when detail=period) and manifest.json into out_dir.
void run_experiment(const ExperimentConfig& cfg, const std::string& config_fingerprint);

// Fig.4-style sweep: for every configured rate pair runs every requested
// policy plus the no-sharing reference (q_min convention applied) and writes
// compare.csv. Requires at least two policies.
std::vector<CompareRow> run_compare(const ExperimentConfig& cfg);
void write_compare(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows,
                   const std::string& config_fingerprint);

// Fig.6-style step-size study; writes sweep.csv. The "variable" trajectory
// uses the decaying schedule eta_t = eta0 / sqrt(t).
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);
void write_sweep(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows,
                 const std::string& config_fingerprint);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> messages;
};

// Schema/polytope checks plus a 5-hyperperiod feasibility smoke run that
// reports virtual-queue growth.
ValidationReport validate_experiment(const ExperimentConfig& cfg);

}  // namespace bwshare
