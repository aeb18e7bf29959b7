#include "bwshare/types.hpp"

#include <algorithm>
#include <cmath>

namespace bwshare {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void QualityModel::validate() const {
  require(gamma_q > 0.0, "quality.gamma_q must be > 0");
  require(theta > 0.0, "quality.theta must be > 0");
  require(beta > 0.0, "quality.beta must be > 0");
  require(rate_unit_divisor > 0.0, "quality.rate_unit_divisor must be > 0");
}

void SystemConfig::validate() const {
  require(num_operators >= 1, "num_operators must be >= 1");
  require(num_regions >= 1, "num_regions must be >= 1");
  require(clients_per_cell >= 1, "clients_per_cell must be >= 1");
  require(slots_per_period >= 1, "slots_per_period must be >= 1");
  require(periods_per_hyperperiod >= 1, "periods_per_hyperperiod must be >= 1");
  require(balance_bound >= 0.0, "balance_bound must be >= 0");
  require(alpha > 0.0, "alpha must be > 0");
  require(v_weight > 0.0, "v_weight must be > 0");
  require(step_size > 0.0, "step_size must be > 0");
  require(percentile > 0.0 && percentile < 1.0, "percentile must be in (0, 1)");
  quality.validate();
}

SharingMatrix SharingMatrix::no_sharing(const SystemConfig& cfg) {
  SharingMatrix s(cfg.num_regions, cfg.num_operators, 0.0);
  for (int r = 0; r < cfg.num_regions; ++r)
    for (int i = 0; i < cfg.num_operators; ++i)
      s.at(r, i, i) = static_cast<double>(cfg.slots_per_period);
  return s;
}

double SharingMatrix::recipient_budget(int region, int recipient) const {
  double total = 0.0;
  for (int j = 0; j < operators_; ++j) total += at(region, j, recipient);
  return total;
}

double SharingMatrix::owner_total(int region, int owner) const {
  double total = 0.0;
  for (int i = 0; i < operators_; ++i) total += at(region, owner, i);
  return total;
}

double SharingMatrix::pair_net(int recipient, int owner) const {
  double net = 0.0;
  for (int r = 0; r < regions_; ++r)
    net += at(r, owner, recipient) - at(r, recipient, owner);
  return net;
}

void PeriodSample::validate(const SystemConfig& cfg) const {
  const size_t n = static_cast<size_t>(cfg.total_clients());
  require(arrivals.size() == n, "arrivals size mismatch");
  require(capacities.size() == n, "capacities size mismatch");
  for (size_t c = 0; c < n; ++c) {
    require(arrivals[c] == 0 || arrivals[c] == 1, "arrival must be 0 or 1");
    require(std::isfinite(capacities[c]) && capacities[c] > 0.0,
            "capacity must be finite and > 0");
  }
}

double VirtualQueueLedger::max_value() const {
  double m = 0.0;
  for (double x : p) m = std::max(m, x);
  return m;
}

}  // namespace bwshare
