#pragma once

#include <string>
#include <vector>

#include "bwshare/scenario.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

// ">= 12 significant digits" serialization used by every CSV writer.
std::string format_number(double v);

// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

// hyperperiod.csv: hyperperiod, total_qoe, shared_r{r}_o{j}_to_o{i}...,
// grad_norm, max_queue.
std::string hyperperiod_csv(const SystemConfig& cfg, const RunTrace& trace);

// clients.csv: operator, region, client, arrivals, satisfied_fraction, final_queue.
std::string clients_csv(const RunTrace& trace);

// periods.csv (detail=period): period, total_qoe, max_queue, dual_sum.
std::string periods_csv(const RunTrace& trace);

struct CompareRow {
  double rate_low = 0.0, rate_high = 0.0;
  std::string policy;
  double qoe = 0.0;
  double qoe_no_sharing = 0.0;
  double improvement_pct = 0.0;
  bool relative_valid = true;
};

// compare.csv: rate_low, rate_high, policy, qoe, qoe_no_sharing,
// improvement_pct, improvement_valid.
std::string compare_csv(const std::vector<CompareRow>& rows);

struct SweepRow {
  std::string eta_label;
  int hyperperiod = 0;
  double total_qoe = 0.0;
  double gap_to_opt = 0.0;  // relative gap to the OPT-SS* objective
};

// sweep.csv: eta, hyperperiod, total_qoe, gap_to_opt.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace bwshare
