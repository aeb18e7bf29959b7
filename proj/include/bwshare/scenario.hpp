#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwshare/types.hpp"

namespace bwshare {

// A change of arrival rates and/or capacities taking effect exactly at a
// hyperperiod boundary.
struct RegimeChange {
  int at_hyperperiod = 0;
  std::optional<std::vector<double>> arrival_rates;     // per cell
  std::optional<std::vector<double>> capacity_per_cell; // bits per timeslot
};

struct ScenarioSpec {
  std::vector<double> arrival_rates;      // Bernoulli parameter per cell
  std::vector<double> capacity_per_cell;  // bits per timeslot per cell
  std::vector<RegimeChange> regime_switches;
  uint64_t seed = 1;
  int horizon_hyperperiods = 200;

  // Stream-identity permutations used by label-symmetry tests: the random
  // stream of client (i, r, n) is keyed by the mapped indices. Empty means
  // identity.
  std::vector<int> stream_operator_map;
  std::vector<int> stream_region_map;

  void validate(const SystemConfig& cfg) const;
};

// Deterministic counter-based sample stream: period k's sample depends only
// on (seed, k, client identity), never on evaluation order.
class ScenarioEngine {
 public:
  ScenarioEngine(SystemConfig cfg, ScenarioSpec spec);

  PeriodSample period(int k) const;
  std::vector<PeriodSample> collect(int num_periods) const;

  const SystemConfig& config() const { return cfg_; }
  const ScenarioSpec& spec() const { return spec_; }
  // Rates/capacities active during hyperperiod t.
  const std::vector<double>& rates_at(int t) const;
  const std::vector<double>& capacities_at(int t) const;

 private:
  SystemConfig cfg_;
  ScenarioSpec spec_;
  // Resolved regimes sorted by start hyperperiod.
  struct Regime {
    int from_hyperperiod;
    std::vector<double> rates;
    std::vector<double> capacities;
  };
  std::vector<Regime> regimes_;
  const Regime& regime_at(int t) const;
};

PeriodSample generate_period(const SystemConfig& cfg, const ScenarioSpec& spec,
                             int period_index);

// ---- Run traces -----------------------------------------------------------

struct HyperRow {
  int t = 0;
  double total_qoe = 0.0;            // per-period average within the hyperperiod
  std::vector<double> sharing;       // flattened SharingMatrix used in t
  double grad_norm = 0.0;
  double max_queue = 0.0;
};

struct PeriodRow {
  int period = 0;
  double qoe = 0.0;
  double max_queue = 0.0;
  double dual_sum = 0.0;
};

struct ClientStats {
  int op = 0, region = 0, n = 0;
  long long arrivals = 0;
  long long satisfied = 0;  // arrival periods with Q >= q_min
  double hinge_sum = 0.0;   // accumulated (q_min - Q + alpha)_+
  double final_queue = 0.0;
};

struct RunTrace {
  std::string policy;
  std::vector<HyperRow> hyper;
  std::vector<PeriodRow> periods;  // only when period detail was requested
  std::vector<ClientStats> clients;
  double overall_qoe = 0.0;  // per-period average over the whole run
  SharingMatrix final_sharing;
  VirtualQueueLedger final_queues;
  int periods_total = 0;
};

// Mean hyperperiod QoE over rows with t >= from_hyperperiod.
double tail_mean_qoe(const RunTrace& trace, int from_hyperperiod);

// Accumulates per-period outcomes into a RunTrace. finish() verifies the
// hinge-implies-percentile implication and throws std::logic_error if the
// bookkeeping ever violates it.
class TraceBuilder {
 public:
  TraceBuilder(const SystemConfig& cfg, std::string policy, bool keep_periods);

  void add_period(int period_index, const PeriodSample& sample,
                  const AllocationResult& alloc, const VirtualQueueLedger& queues_after);
  void close_hyperperiod(int t, const SharingMatrix& sharing_used, double grad_norm);
  RunTrace finish(SharingMatrix final_sharing, VirtualQueueLedger final_queues);

 private:
  const SystemConfig cfg_;
  RunTrace trace_;
  bool keep_periods_;
  double hyper_qoe_sum_ = 0.0;
  int hyper_periods_ = 0;
  double hyper_max_queue_ = 0.0;
  double total_qoe_sum_ = 0.0;
};

struct SatisfactionRow {
  int op = 0, region = 0, n = 0;
  double fraction = 0.0;
};

// Satisfied fraction per client; clients without arrivals are excluded.
std::vector<SatisfactionRow> percentile_satisfaction(const RunTrace& trace);

struct Improvement {
  double percent = 0.0;   // meaningful when relative_valid
  double absolute = 0.0;
  bool relative_valid = true;
};

Improvement improvement_over_no_sharing(const RunTrace& policy_trace,
                                        const RunTrace& nosharing_trace);

}  // namespace bwshare
