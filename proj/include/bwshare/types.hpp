#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bwshare {

// Logarithmic perceived-quality model. Quality of an allocation is
//   Q(rate) = (1/gamma_q) * ln((rate + theta) / beta)
// with rate in Mbps computed as tau * capacity / (T * rate_unit_divisor).
struct QualityModel {
  double gamma_q = 0.8;
  double theta = 0.1;              // Mbps offset
  double beta = 0.4;               // Mbps scale
  double rate_unit_divisor = 1e6;  // bits per Mbps

  void validate() const;
};

enum class StepSchedule { Constant, InvSqrt };

// Static parameters of the world. Immutable after construction.
struct SystemConfig {
  int num_operators = 2;
  int num_regions = 2;
  int clients_per_cell = 30;         // per (operator, region) pair
  int slots_per_period = 20;         // T
  int periods_per_hyperperiod = 20;  // H
  double balance_bound = 0.001;      // zeta, applied to every operator pair
  double q_min = 0.3;
  double alpha = 0.008;
  double v_weight = 1.0;             // V
  double step_size = 0.01;           // eta
  StepSchedule step_schedule = StepSchedule::Constant;
  double percentile = 0.95;
  QualityModel quality;

  int cells() const { return num_operators * num_regions; }
  int total_clients() const { return cells() * clients_per_cell; }
  int cell_index(int op, int region) const { return op * num_regions + region; }
  int client_index(int op, int region, int n) const {
    return cell_index(op, region) * clients_per_cell + n;
  }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Sharing variables for one hyperperiod: entries(region, owner, recipient)
// holds the fractional timeslots owner grants recipient in that region.
// Diagonal entries (owner == recipient) are the owner's self-use.
class SharingMatrix {
 public:
  SharingMatrix() = default;
  SharingMatrix(int num_regions, int num_operators, double fill = 0.0)
      : regions_(num_regions),
        operators_(num_operators),
        v_(static_cast<size_t>(num_regions) * num_operators * num_operators, fill) {}

  static SharingMatrix no_sharing(const SystemConfig& cfg);

  double& at(int region, int owner, int recipient) {
    return v_[index(region, owner, recipient)];
  }
  double at(int region, int owner, int recipient) const {
    return v_[index(region, owner, recipient)];
  }

  int num_regions() const { return regions_; }
  int num_operators() const { return operators_; }
  size_t size() const { return v_.size(); }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  // Sum_j S^{j->i}_r: timeslot budget of recipient i in region r.
  double recipient_budget(int region, int recipient) const;
  // Sum_i S^{j->i}_r: total timeslots owner j commits in region r.
  double owner_total(int region, int owner) const;
  // Sum_r (S^{j->i}_r - S^{i->j}_r): net slots recipient i receives from j.
  double pair_net(int recipient, int owner) const;

  bool same_shape(const SharingMatrix& o) const {
    return regions_ == o.regions_ && operators_ == o.operators_;
  }

 private:
  size_t index(int region, int owner, int recipient) const {
    return (static_cast<size_t>(region) * operators_ + owner) * operators_ + recipient;
  }
  int regions_ = 0;
  int operators_ = 0;
  std::vector<double> v_;
};

// Same index space as SharingMatrix; holds the hyperperiod gradient
// g^{j->i}_r (identical across owners j of one (recipient, region) cell).
using SharingGradient = SharingMatrix;

// Realized arrivals and channel capacities for one period, indexed by
// SystemConfig::client_index.
struct PeriodSample {
  std::vector<uint8_t> arrivals;    // 0/1 per client
  std::vector<double> capacities;   // bits per timeslot, > 0

  void validate(const SystemConfig& cfg) const;
};

// Per-client timeslot allocations plus the dual multiplier of each
// (operator, region) budget constraint.
struct AllocationResult {
  std::vector<double> tau;    // per client, 0 for clients without arrival
  std::vector<double> duals;  // per cell, indexed by SystemConfig::cell_index
};

// Per-client deficit queues tracking the percentile constraint.
struct VirtualQueueLedger {
  std::vector<double> p;

  static VirtualQueueLedger zeros(const SystemConfig& cfg) {
    return VirtualQueueLedger{std::vector<double>(cfg.total_clients(), 0.0)};
  }
  double max_value() const;
};

}  // namespace bwshare
