#pragma once

#include <string>
#include <vector>

#include "bwshare/abs.hpp"
#include "bwshare/scenario.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

enum class PolicyKind { NoSharing, OptimalStaticStar, DynamicProxy, Abs };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);  // throws on unknown name

// S^{i->i}_r = T, off-diagonal 0.
SharingMatrix no_sharing_matrix(const SystemConfig& cfg);

struct OptSsOptions {
  int max_iterations = 250;
  double grad_map_tol = 1e-4;  // on ||S - proj(S - eta*g)|| / eta
  double eta = 0.0;            // 0 means cfg.step_size
};

struct OptSsResult {
  SharingMatrix sharing;
  double objective = 0.0;  // time-averaged total QoE at the returned sharing
  bool converged = false;
  int iterations = 0;
};

// Offline optimum of the convexified static-sharing program by full-batch
// projected gradient over the complete arrival/capacity record. The inner
// optimum reuses the per-period RA machinery with virtual queues persisting
// across passes so the time-average hinge constraint is priced correctly.
OptSsResult solve_opt_ss_star(const SystemConfig& cfg,
                              const std::vector<PeriodSample>& all_samples,
                              const OptSsOptions& options = {});

struct DynamicProxyOptions {
  bool keep_periods = false;
  // Cumulative net transfer between any operator pair is clamped to this many
  // slots (plus the per-period zeta allowance), keeping the long-run average
  // imbalance within the balance band.
  double imbalance_cap_slots = -1.0;  // < 0 means 2 * T
};

// Per-period joint sharing/scheduling baseline: each region is solved as one
// pooled allocation over all operators, donations are attributed from owners
// with slack, and a balance ledger caps the cumulative pairwise net transfer.
RunTrace run_dynamic_proxy(const SystemConfig& cfg, const ScenarioEngine& scenario,
                           int num_hyperperiods, const DynamicProxyOptions& options = {});

struct Lemma3Gap {
  double exact = 0.0;        // per-period QoE gap, full formula
  double high_capacity = 0.0;  // c >> theta simplification
};

// Analytic static-vs-no-sharing QoE gap for deterministic arrivals with
// per-cell counts sigma (SystemConfig::cell_index order) and one common
// capacity (bits per timeslot). Throws if any cell count is zero.
Lemma3Gap lemma3_gap(const std::vector<int>& arrivals_per_cell, double capacity,
                     const SystemConfig& cfg);

struct PolicyRunOptions {
  bool keep_periods = false;
  std::optional<SharingMatrix> initial_sharing;  // Abs only
  OptSsOptions opt_ss;                           // OptimalStaticStar only
};

// Uniform entry point: runs the selected policy against the scenario stream.
// OptimalStaticStar first solves on the full offline record, then deploys the
// fixed optimum over the horizon with fresh queues.
RunTrace run_policy(const SystemConfig& cfg, const ScenarioEngine& scenario,
                    PolicyKind kind, int num_hyperperiods,
                    const PolicyRunOptions& options = {});

}  // namespace bwshare
