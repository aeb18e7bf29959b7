#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bwshare/polytope.hpp"
#include "bwshare/ra.hpp"
#include "bwshare/scenario.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

// One queue-update step: for clients with an arrival,
//   P <- max(P + (q_min - Q(tau) + alpha)_+ - (1 - percentile) * alpha, 0);
// queues of clients without an arrival are untouched.
VirtualQueueLedger update_virtual_queues(const VirtualQueueLedger& queues,
                                         const PeriodSample& sample,
                                         const AllocationResult& alloc,
                                         const SystemConfig& cfg);

// g^{j->i}_r = -sum_k lambda^i_r, identical for every owner j.
SharingGradient sharing_gradient(const std::vector<double>& accumulated_duals,
                                 const SystemConfig& cfg);

double gradient_norm(const SharingGradient& g);

struct AbsState {
  SharingMatrix sharing;
  VirtualQueueLedger queues;
  int hyperperiod_index = 0;  // t, 1-based once the first step ran
  std::vector<double> accumulated_duals;

  static AbsState initial(const SystemConfig& cfg,
                          std::optional<SharingMatrix> initial_sharing = std::nullopt);
};

struct HyperperiodTrace {
  std::vector<PeriodSample> samples;
  std::vector<AllocationResult> allocations;
  std::vector<double> period_qoe;
  std::vector<VirtualQueueLedger> queue_snapshots;
  SharingGradient gradient;
  SharingMatrix next_sharing;
};

// Step size used for hyperperiod t (1-based).
double step_size_at(const SystemConfig& cfg, int t);

// Runs the H periods of one hyperperiod with the frozen sharing matrix,
// updates the virtual queues, then applies the projected gradient update.
std::pair<AbsState, HyperperiodTrace> abs_hyperperiod_step(
    const AbsState& state, std::span<const PeriodSample> samples, const SystemConfig& cfg);

struct AbsRunOptions {
  std::optional<SharingMatrix> initial_sharing;  // default: no-sharing matrix
  bool keep_periods = false;
  std::optional<double> eta_override;  // fixed step size, may be 0
};

// Drives abs_hyperperiod_step against the scenario stream.
RunTrace run_abs(const SystemConfig& cfg, const ScenarioEngine& scenario,
                 int num_hyperperiods, const AbsRunOptions& options = {});

// Runs a fixed sharing matrix (no gradient updates) over the horizon; used by
// the no-sharing baseline and for deploying an offline-optimized matrix.
RunTrace run_fixed_sharing(const SystemConfig& cfg, const ScenarioEngine& scenario,
                           int num_hyperperiods, const SharingMatrix& sharing,
                           const std::string& policy_label, bool keep_periods = false);

}  // namespace bwshare
