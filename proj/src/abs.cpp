#include "bwshare/abs.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "bwshare/quality.hpp"

namespace bwshare {

VirtualQueueLedger update_virtual_queues(const VirtualQueueLedger& queues,
                                         const PeriodSample& sample,
                                         const AllocationResult& alloc,
                                         const SystemConfig& cfg) {
  VirtualQueueLedger next = queues;
  const double drain = (1.0 - cfg.percentile) * cfg.alpha;
  for (int c = 0; c < cfg.total_clients(); ++c) {
    if (!sample.arrivals[c]) continue;
    const double q =
        quality(alloc.tau[c], sample.capacities[c], cfg.quality, cfg.slots_per_period);
    next.p[c] = std::max(queues.p[c] + hinge(q, cfg.q_min, cfg.alpha) - drain, 0.0);
  }
  return next;
}

SharingGradient sharing_gradient(const std::vector<double>& accumulated_duals,
                                 const SystemConfig& cfg) {
  SharingGradient g(cfg.num_regions, cfg.num_operators, 0.0);
  for (int i = 0; i < cfg.num_operators; ++i)
    for (int r = 0; r < cfg.num_regions; ++r) {
      const double value = -accumulated_duals[cfg.cell_index(i, r)];
      for (int j = 0; j < cfg.num_operators; ++j) g.at(r, j, i) = value;
    }
  return g;
}

double gradient_norm(const SharingGradient& g) {
  double sum = 0.0;
  for (double v : g.data()) sum += v * v;
  return std::sqrt(sum);
}

AbsState AbsState::initial(const SystemConfig& cfg,
                           std::optional<SharingMatrix> initial_sharing) {
  AbsState state;
  state.sharing = initial_sharing ? std::move(*initial_sharing)
                                  : SharingMatrix::no_sharing(cfg);
  state.queues = VirtualQueueLedger::zeros(cfg);
  state.hyperperiod_index = 0;
  state.accumulated_duals.assign(cfg.cells(), 0.0);
  return state;
}

double step_size_at(const SystemConfig& cfg, int t) {
  switch (cfg.step_schedule) {
    case StepSchedule::InvSqrt:
      return cfg.step_size / std::sqrt(static_cast<double>(std::max(t, 1)));
    case StepSchedule::Constant:
    default:
      return cfg.step_size;
  }
}

std::pair<AbsState, HyperperiodTrace> abs_hyperperiod_step(
    const AbsState& state, std::span<const PeriodSample> samples,
    const SystemConfig& cfg) {
  if (static_cast<int>(samples.size()) != cfg.periods_per_hyperperiod)
    throw std::invalid_argument("expected exactly H period samples");

  AbsState next = state;
  next.accumulated_duals.assign(cfg.cells(), 0.0);
  HyperperiodTrace trace;
  trace.samples.reserve(samples.size());

  for (const PeriodSample& sample : samples) {
    const RaProblem problem = make_ra_problem(cfg, state.sharing, sample, next.queues);
    AllocationResult alloc = solve_ra(problem);
    for (int cell = 0; cell < cfg.cells(); ++cell)
      next.accumulated_duals[cell] += alloc.duals[cell];
    next.queues = update_virtual_queues(next.queues, sample, alloc, cfg);
    trace.period_qoe.push_back(period_qoe(cfg, sample, alloc));
    trace.samples.push_back(sample);
    trace.allocations.push_back(std::move(alloc));
    trace.queue_snapshots.push_back(next.queues);
  }

  trace.gradient = sharing_gradient(next.accumulated_duals, cfg);
  const int t = state.hyperperiod_index + 1;
  const double eta = step_size_at(cfg, t);
  SharingMatrix moved = state.sharing;
  for (size_t e = 0; e < moved.size(); ++e)
    moved.data()[e] -= eta * trace.gradient.data()[e];
  next.sharing = project_onto_omega(moved, cfg);
  next.hyperperiod_index = t;
  trace.next_sharing = next.sharing;
  return {std::move(next), std::move(trace)};
}

namespace {

RunTrace run_loop(const SystemConfig& cfg, const ScenarioEngine& scenario,
                  int num_hyperperiods, SharingMatrix initial,
                  const std::string& label, bool adapt, bool keep_periods) {
  const MembershipReport membership = validate_sharing(initial, cfg);
  if (!membership.member)
    throw std::invalid_argument("initial sharing is not in the polytope: " +
                                membership.violations.front().constraint);

  AbsState state = AbsState::initial(cfg, initial);
  TraceBuilder builder(cfg, label, keep_periods);
  const int H = cfg.periods_per_hyperperiod;

  for (int t = 0; t < num_hyperperiods; ++t) {
    const SharingMatrix used = state.sharing;
    std::vector<PeriodSample> samples;
    samples.reserve(H);
    for (int h = 0; h < H; ++h) samples.push_back(scenario.period(t * H + h));

    if (adapt) {
      auto [next, hyper] = abs_hyperperiod_step(state, samples, cfg);
      for (int h = 0; h < H; ++h)
        builder.add_period(t * H + h, hyper.samples[h], hyper.allocations[h],
                           hyper.queue_snapshots[h]);
      builder.close_hyperperiod(t, used, gradient_norm(hyper.gradient));
      state = std::move(next);
    } else {
      for (int h = 0; h < H; ++h) {
        const PeriodSample& sample = samples[h];
        const RaProblem problem = make_ra_problem(cfg, state.sharing, sample, state.queues);
        const AllocationResult alloc = solve_ra(problem);
        state.queues = update_virtual_queues(state.queues, sample, alloc, cfg);
        builder.add_period(t * H + h, sample, alloc, state.queues);
      }
      builder.close_hyperperiod(t, used, 0.0);
    }
  }
  return builder.finish(state.sharing, state.queues);
}

}  // namespace

RunTrace run_abs(const SystemConfig& cfg, const ScenarioEngine& scenario,
                 int num_hyperperiods, const AbsRunOptions& options) {
  SystemConfig run_cfg = cfg;
  if (options.eta_override) {
    run_cfg.step_size = *options.eta_override;
    run_cfg.step_schedule = StepSchedule::Constant;
  }
  SharingMatrix initial = options.initial_sharing ? *options.initial_sharing
                                                  : SharingMatrix::no_sharing(cfg);
  return run_loop(run_cfg, scenario, num_hyperperiods, std::move(initial), "abs",
                  /*adapt=*/true, options.keep_periods);
}

RunTrace run_fixed_sharing(const SystemConfig& cfg, const ScenarioEngine& scenario,
                           int num_hyperperiods, const SharingMatrix& sharing,
                           const std::string& policy_label, bool keep_periods) {
  return run_loop(cfg, scenario, num_hyperperiods, sharing, policy_label,
                  /*adapt=*/false, keep_periods);
}

}  // namespace bwshare
