#include "bwshare/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "bwshare/quality.hpp"

namespace bwshare {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(uint64_t seed, uint64_t period, uint64_t op, uint64_t region,
                 uint64_t client) {
  uint64_t h = splitmix64(seed ^ 0x5bf0'3635'dc1e'8a1dULL);
  h = splitmix64(h ^ period);
  h = splitmix64(h ^ (op << 40) ^ (region << 20) ^ client);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void ScenarioSpec::validate(const SystemConfig& cfg) const {
  require(static_cast<int>(arrival_rates.size()) == cfg.cells(),
          "arrival_rates must have one entry per (operator, region) cell");
  for (double g : arrival_rates)
    require(g >= 0.0 && g <= 1.0, "arrival_rates entries must be in [0, 1]");
  require(static_cast<int>(capacity_per_cell.size()) == cfg.cells(),
          "capacity_per_cell must have one entry per cell");
  for (double c : capacity_per_cell)
    require(std::isfinite(c) && c > 0.0, "capacity_per_cell entries must be > 0");
  require(horizon_hyperperiods >= 0, "horizon_hyperperiods must be >= 0");
  int prev = -1;
  for (const RegimeChange& s : regime_switches) {
    require(s.at_hyperperiod > prev, "regime_switches indices must be strictly increasing");
    prev = s.at_hyperperiod;
    if (s.arrival_rates) {
      require(static_cast<int>(s.arrival_rates->size()) == cfg.cells(),
              "regime arrival_rates must have one entry per cell");
      for (double g : *s.arrival_rates)
        require(g >= 0.0 && g <= 1.0, "regime arrival_rates entries must be in [0, 1]");
    }
    if (s.capacity_per_cell) {
      require(static_cast<int>(s.capacity_per_cell->size()) == cfg.cells(),
              "regime capacity_per_cell must have one entry per cell");
      for (double c : *s.capacity_per_cell)
        require(std::isfinite(c) && c > 0.0, "regime capacity entries must be > 0");
    }
  }
  if (!stream_operator_map.empty())
    require(static_cast<int>(stream_operator_map.size()) == cfg.num_operators,
            "stream_operator_map size mismatch");
  if (!stream_region_map.empty())
    require(static_cast<int>(stream_region_map.size()) == cfg.num_regions,
            "stream_region_map size mismatch");
}

ScenarioEngine::ScenarioEngine(SystemConfig cfg, ScenarioSpec spec)
    : cfg_(std::move(cfg)), spec_(std::move(spec)) {
  spec_.validate(cfg_);
  Regime base{0, spec_.arrival_rates, spec_.capacity_per_cell};
  regimes_.push_back(base);
  for (const RegimeChange& s : spec_.regime_switches) {
    Regime next = regimes_.back();
    next.from_hyperperiod = s.at_hyperperiod;
    if (s.arrival_rates) next.rates = *s.arrival_rates;
    if (s.capacity_per_cell) next.capacities = *s.capacity_per_cell;
    regimes_.push_back(std::move(next));
  }
}

const ScenarioEngine::Regime& ScenarioEngine::regime_at(int t) const {
  const Regime* active = &regimes_.front();
  for (const Regime& r : regimes_) {
    if (r.from_hyperperiod <= t) active = &r;
    else break;
  }
  return *active;
}

const std::vector<double>& ScenarioEngine::rates_at(int t) const {
  return regime_at(t).rates;
}

const std::vector<double>& ScenarioEngine::capacities_at(int t) const {
  return regime_at(t).capacities;
}

PeriodSample ScenarioEngine::period(int k) const {
  const int t = k / cfg_.periods_per_hyperperiod;
  const Regime& regime = regime_at(t);
  PeriodSample sample;
  sample.arrivals.assign(cfg_.total_clients(), 0);
  sample.capacities.assign(cfg_.total_clients(), 0.0);
  for (int i = 0; i < cfg_.num_operators; ++i) {
    const int key_op = spec_.stream_operator_map.empty() ? i : spec_.stream_operator_map[i];
    for (int r = 0; r < cfg_.num_regions; ++r) {
      const int key_region = spec_.stream_region_map.empty() ? r : spec_.stream_region_map[r];
      const int cell = cfg_.cell_index(i, r);
      for (int n = 0; n < cfg_.clients_per_cell; ++n) {
        const int c = cfg_.client_index(i, r, n);
        const double u = uniform01(spec_.seed, static_cast<uint64_t>(k),
                                   static_cast<uint64_t>(key_op),
                                   static_cast<uint64_t>(key_region),
                                   static_cast<uint64_t>(n));
        sample.arrivals[c] = u < regime.rates[cell] ? 1 : 0;
        sample.capacities[c] = regime.capacities[cell];
      }
    }
  }
  return sample;
}

std::vector<PeriodSample> ScenarioEngine::collect(int num_periods) const {
  std::vector<PeriodSample> out;
  out.reserve(num_periods);
  for (int k = 0; k < num_periods; ++k) out.push_back(period(k));
  return out;
}

PeriodSample generate_period(const SystemConfig& cfg, const ScenarioSpec& spec,
                             int period_index) {
  return ScenarioEngine(cfg, spec).period(period_index);
}

// ---- Traces ----------------------------------------------------------------

double tail_mean_qoe(const RunTrace& trace, int from_hyperperiod) {
  double sum = 0.0;
  int count = 0;
  for (const HyperRow& row : trace.hyper) {
    if (row.t < from_hyperperiod) continue;
    sum += row.total_qoe;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no hyperperiods in tail window");
  return sum / count;
}

TraceBuilder::TraceBuilder(const SystemConfig& cfg, std::string policy, bool keep_periods)
    : cfg_(cfg), keep_periods_(keep_periods) {
  trace_.policy = std::move(policy);
  trace_.clients.reserve(cfg_.total_clients());
  for (int i = 0; i < cfg_.num_operators; ++i)
    for (int r = 0; r < cfg_.num_regions; ++r)
      for (int n = 0; n < cfg_.clients_per_cell; ++n)
        trace_.clients.push_back({i, r, n, 0, 0, 0.0, 0.0});
}

void TraceBuilder::add_period(int period_index, const PeriodSample& sample,
                              const AllocationResult& alloc,
                              const VirtualQueueLedger& queues_after) {
  double qoe = 0.0;
  for (int c = 0; c < cfg_.total_clients(); ++c) {
    if (!sample.arrivals[c]) continue;
    const double q =
        quality(alloc.tau[c], sample.capacities[c], cfg_.quality, cfg_.slots_per_period);
    qoe += q;
    ClientStats& stats = trace_.clients[c];
    stats.arrivals += 1;
    if (q >= cfg_.q_min) stats.satisfied += 1;
    stats.hinge_sum += hinge(q, cfg_.q_min, cfg_.alpha);
  }
  const double max_q = queues_after.max_value();
  hyper_qoe_sum_ += qoe;
  hyper_periods_ += 1;
  hyper_max_queue_ = std::max(hyper_max_queue_, max_q);
  total_qoe_sum_ += qoe;
  trace_.periods_total += 1;
  if (keep_periods_) {
    double dual_sum = 0.0;
    for (double d : alloc.duals) dual_sum += d;
    trace_.periods.push_back({period_index, qoe, max_q, dual_sum});
  }
}

void TraceBuilder::close_hyperperiod(int t, const SharingMatrix& sharing_used,
                                     double grad_norm) {
  HyperRow row;
  row.t = t;
  row.total_qoe = hyper_periods_ > 0 ? hyper_qoe_sum_ / hyper_periods_ : 0.0;
  row.sharing = sharing_used.data();
  row.grad_norm = grad_norm;
  row.max_queue = hyper_max_queue_;
  trace_.hyper.push_back(std::move(row));
  hyper_qoe_sum_ = 0.0;
  hyper_periods_ = 0;
  hyper_max_queue_ = 0.0;
}

RunTrace TraceBuilder::finish(SharingMatrix final_sharing, VirtualQueueLedger final_queues) {
  trace_.overall_qoe =
      trace_.periods_total > 0 ? total_qoe_sum_ / trace_.periods_total : 0.0;
  trace_.final_sharing = std::move(final_sharing);
  for (int c = 0; c < cfg_.total_clients(); ++c)
    trace_.clients[c].final_queue = final_queues.p[c];
  trace_.final_queues = std::move(final_queues);

  // Consequence of the hinge convexification: a client whose average hinge
  // is within (1 - percentile) * alpha must have satisfied fraction >=
  // percentile. A violation means the quality/queue bookkeeping is broken.
  const double budget = (1.0 - cfg_.percentile) * cfg_.alpha;
  for (const ClientStats& s : trace_.clients) {
    if (s.arrivals == 0) continue;
    const double avg_hinge = s.hinge_sum / static_cast<double>(s.arrivals);
    const double fraction = static_cast<double>(s.satisfied) / s.arrivals;
    if (avg_hinge <= budget * (1.0 - 1e-12) && fraction < cfg_.percentile - 1e-9)
      throw std::logic_error("hinge/percentile bookkeeping inconsistency");
  }
  return std::move(trace_);
}

std::vector<SatisfactionRow> percentile_satisfaction(const RunTrace& trace) {
  std::vector<SatisfactionRow> rows;
  for (const ClientStats& s : trace.clients) {
    if (s.arrivals == 0) continue;
    rows.push_back({s.op, s.region, s.n,
                    static_cast<double>(s.satisfied) / static_cast<double>(s.arrivals)});
  }
  return rows;
}

Improvement improvement_over_no_sharing(const RunTrace& policy_trace,
                                        const RunTrace& nosharing_trace) {
  Improvement imp;
  imp.absolute = policy_trace.overall_qoe - nosharing_trace.overall_qoe;
  const double denom = std::abs(nosharing_trace.overall_qoe);
  if (denom < 1e-12) {
    imp.relative_valid = false;
    imp.percent = 0.0;
  } else {
    imp.percent = 100.0 * imp.absolute / denom;
  }
  return imp;
}

}  // namespace bwshare
