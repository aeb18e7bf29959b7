#include "bwshare/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "bwshare/quality.hpp"

namespace bwshare {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::NoSharing: return "no_sharing";
    case PolicyKind::OptimalStaticStar: return "opt_ss_star";
    case PolicyKind::DynamicProxy: return "dynamic_proxy";
    case PolicyKind::Abs: return "abs";
  }
  return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "no_sharing") return PolicyKind::NoSharing;
  if (name == "opt_ss_star") return PolicyKind::OptimalStaticStar;
  if (name == "dynamic_proxy") return PolicyKind::DynamicProxy;
  if (name == "abs") return PolicyKind::Abs;
  throw std::invalid_argument("unknown policy: " + name);
}

SharingMatrix no_sharing_matrix(const SystemConfig& cfg) {
  return SharingMatrix::no_sharing(cfg);
}

OptSsResult solve_opt_ss_star(const SystemConfig& cfg,
                              const std::vector<PeriodSample>& all_samples,
                              const OptSsOptions& options) {
  if (all_samples.empty()) throw std::invalid_argument("no periods");
  const int K = static_cast<int>(all_samples.size());
  const double eta = options.eta > 0.0 ? options.eta : cfg.step_size;
  // Scale the summed duals to one hyperperiod's worth so the same step size
  // moves the iterate at the same pace as the online update.
  const double scale = static_cast<double>(cfg.periods_per_hyperperiod) / K;

  OptSsResult result;
  result.sharing = SharingMatrix::no_sharing(cfg);
  VirtualQueueLedger queues = VirtualQueueLedger::zeros(cfg);
  std::vector<double> duals(cfg.cells(), 0.0);

  for (int it = 1; it <= options.max_iterations; ++it) {
    std::fill(duals.begin(), duals.end(), 0.0);
    for (int k = 0; k < K; ++k) {
      const RaProblem problem = make_ra_problem(cfg, result.sharing, all_samples[k], queues);
      const AllocationResult alloc = solve_ra(problem);
      for (int cell = 0; cell < cfg.cells(); ++cell) duals[cell] += alloc.duals[cell];
      queues = update_virtual_queues(queues, all_samples[k], alloc, cfg);
    }
    std::vector<double> scaled(duals);
    for (double& d : scaled) d *= scale;
    const SharingGradient g = sharing_gradient(scaled, cfg);
    SharingMatrix moved = result.sharing;
    for (size_t e = 0; e < moved.size(); ++e) moved.data()[e] -= eta * g.data()[e];
    SharingMatrix next = project_onto_omega(moved, cfg);
    double shift = 0.0;
    for (size_t e = 0; e < next.size(); ++e) {
      const double d = next.data()[e] - result.sharing.data()[e];
      shift += d * d;
    }
    result.sharing = std::move(next);
    result.iterations = it;
    if (std::sqrt(shift) / eta < options.grad_map_tol) {
      result.converged = true;
      break;
    }
  }

  double qoe = 0.0;
  for (int k = 0; k < K; ++k) {
    const RaProblem problem = make_ra_problem(cfg, result.sharing, all_samples[k], queues);
    const AllocationResult alloc = solve_ra(problem);
    queues = update_virtual_queues(queues, all_samples[k], alloc, cfg);
    qoe += period_qoe(cfg, all_samples[k], alloc);
  }
  result.objective = qoe / K;
  return result;
}

namespace {

struct PooledCell {
  CellProblem problem;
  std::vector<int> member_clients;  // global index per problem client
  std::vector<int> member_ops;      // owning operator per problem client
};

PooledCell build_region_pool(const SystemConfig& cfg, const PeriodSample& sample,
                             const VirtualQueueLedger& queues, int region) {
  PooledCell pool;
  pool.problem.budget = static_cast<double>(cfg.num_operators) * cfg.slots_per_period;
  pool.problem.v_weight = cfg.v_weight;
  pool.problem.q_min = cfg.q_min;
  pool.problem.alpha = cfg.alpha;
  pool.problem.quality = cfg.quality;
  pool.problem.slots_per_period = cfg.slots_per_period;
  for (int i = 0; i < cfg.num_operators; ++i)
    for (int n = 0; n < cfg.clients_per_cell; ++n) {
      const int c = cfg.client_index(i, region, n);
      if (!sample.arrivals[c]) continue;
      pool.problem.clients.push_back({sample.capacities[c], queues.p[c]});
      pool.member_clients.push_back(c);
      pool.member_ops.push_back(i);
    }
  return pool;
}

}  // namespace

RunTrace run_dynamic_proxy(const SystemConfig& cfg, const ScenarioEngine& scenario,
                           int num_hyperperiods, const DynamicProxyOptions& options) {
  const int O = cfg.num_operators;
  const int R = cfg.num_regions;
  const int H = cfg.periods_per_hyperperiod;
  const double T = static_cast<double>(cfg.slots_per_period);
  const double cap = options.imbalance_cap_slots >= 0.0 ? options.imbalance_cap_slots
                                                        : 2.0 * T;

  VirtualQueueLedger queues = VirtualQueueLedger::zeros(cfg);
  // net_received[i][j]: cumulative slots i received from j minus slots i gave j.
  std::vector<std::vector<double>> net_received(O, std::vector<double>(O, 0.0));
  TraceBuilder builder(cfg, "dynamic_proxy", options.keep_periods);
  SharingMatrix sharing_sum(R, O, 0.0);
  SharingMatrix last_sharing = SharingMatrix::no_sharing(cfg);

  for (int t = 0; t < num_hyperperiods; ++t) {
    std::fill(sharing_sum.data().begin(), sharing_sum.data().end(), 0.0);
    for (int h = 0; h < H; ++h) {
      const int k = t * H + h;
      const PeriodSample sample = scenario.period(k);

      // Pooled per-region solve decides how much each operator's clients
      // would use if the whole region budget were shared freely.
      std::vector<std::vector<double>> used(R, std::vector<double>(O, 0.0));
      for (int r = 0; r < R; ++r) {
        const PooledCell pool = build_region_pool(cfg, sample, queues, r);
        if (pool.problem.clients.empty()) continue;
        const CellSolution sol = solve_cell(pool.problem);
        for (size_t m = 0; m < sol.tau.size(); ++m)
          used[r][pool.member_ops[m]] += sol.tau[m];
      }

      // Attribute donations: operators over T draw from operators with slack,
      // preferring donors the receiver has historically lent to.
      std::vector<std::vector<std::vector<double>>> y(
          R, std::vector<std::vector<double>>(O, std::vector<double>(O, 0.0)));
      for (int r = 0; r < R; ++r) {
        std::vector<double> slack(O, 0.0), deficit(O, 0.0);
        for (int i = 0; i < O; ++i) {
          slack[i] = std::max(T - used[r][i], 0.0);
          deficit[i] = std::max(used[r][i] - T, 0.0);
        }
        for (int i = 0; i < O; ++i) {
          if (deficit[i] <= 0.0) continue;
          std::vector<int> donors;
          for (int j = 0; j < O; ++j)
            if (j != i && slack[j] > 0.0) donors.push_back(j);
          std::stable_sort(donors.begin(), donors.end(), [&](int a, int b) {
            return net_received[i][a] < net_received[i][b];
          });
          double need = deficit[i];
          for (int j : donors) {
            if (need <= 1e-12) break;
            const double give = std::min(need, slack[j]);
            y[r][j][i] += give;
            slack[j] -= give;
            need -= give;
          }
        }
      }

      // Clamp cumulative pairwise net transfers to the balance ledger band.
      for (int i = 0; i < O; ++i)
        for (int j = i + 1; j < O; ++j) {
          double net = 0.0;
          for (int r = 0; r < R; ++r) net += y[r][j][i] - y[r][i][j];
          const double band = cap + cfg.balance_bound;
          double excess = net_received[i][j] + net - band;
          if (excess > 0.0) {
            for (int r = 0; r < R && excess > 0.0; ++r) {
              const double cut = std::min(y[r][j][i], excess);
              y[r][j][i] -= cut;
              excess -= cut;
            }
          }
          double shortfall = -(net_received[i][j] + net) - band;
          if (shortfall > 0.0) {
            for (int r = 0; r < R && shortfall > 0.0; ++r) {
              const double cut = std::min(y[r][i][j], shortfall);
              y[r][i][j] -= cut;
              shortfall -= cut;
            }
          }
        }

      // Final per-period sharing matrix and per-cell budgets.
      SharingMatrix sharing(R, O, 0.0);
      for (int r = 0; r < R; ++r)
        for (int i = 0; i < O; ++i) {
          double donated = 0.0, received = 0.0;
          for (int j = 0; j < O; ++j) {
            if (j == i) continue;
            sharing.at(r, j, i) = y[r][j][i];
            donated += y[r][i][j];
            received += y[r][j][i];
          }
          sharing.at(r, i, i) = T - donated;
        }

      RaProblem problem = make_ra_problem(cfg, sharing, sample, queues);
      const AllocationResult alloc = solve_ra(problem);
      queues = update_virtual_queues(queues, sample, alloc, cfg);
      builder.add_period(k, sample, alloc, queues);

      for (int i = 0; i < O; ++i)
        for (int j = 0; j < O; ++j) {
          if (i == j) continue;
          double net = 0.0;
          for (int r = 0; r < R; ++r) net += y[r][j][i] - y[r][i][j];
          net_received[i][j] += net;
        }
      for (size_t e = 0; e < sharing.size(); ++e)
        sharing_sum.data()[e] += sharing.data()[e];
      last_sharing = std::move(sharing);
    }
    SharingMatrix mean_sharing = sharing_sum;
    for (double& v : mean_sharing.data()) v /= H;
    builder.close_hyperperiod(t, mean_sharing, 0.0);
  }
  return builder.finish(last_sharing, queues);
}

Lemma3Gap lemma3_gap(const std::vector<int>& arrivals_per_cell, double capacity,
                     const SystemConfig& cfg) {
  if (static_cast<int>(arrivals_per_cell.size()) != cfg.cells())
    throw std::invalid_argument("arrivals_per_cell must have one entry per cell");
  long long sigma_total = 0;
  for (int s : arrivals_per_cell) {
    if (s < 1)
      throw std::invalid_argument("formula requires arrivals in every cell");
    sigma_total += s;
  }
  const double n_cells = static_cast<double>(cfg.cells());
  const double c_mbps = capacity / cfg.quality.rate_unit_divisor;
  const double inv_gamma = 1.0 / cfg.quality.gamma_q;
  const double shared_rate = n_cells * c_mbps / static_cast<double>(sigma_total);

  Lemma3Gap gap;
  for (int s : arrivals_per_cell) {
    const double own_rate = c_mbps / static_cast<double>(s);
    gap.exact += inv_gamma * s *
                 std::log((shared_rate + cfg.quality.theta) / (own_rate + cfg.quality.theta));
    gap.high_capacity +=
        inv_gamma * s * std::log(n_cells * s / static_cast<double>(sigma_total));
  }
  return gap;
}

RunTrace run_policy(const SystemConfig& cfg, const ScenarioEngine& scenario,
                    PolicyKind kind, int num_hyperperiods,
                    const PolicyRunOptions& options) {
  switch (kind) {
    case PolicyKind::NoSharing:
      return run_fixed_sharing(cfg, scenario, num_hyperperiods, no_sharing_matrix(cfg),
                               "no_sharing", options.keep_periods);
    case PolicyKind::Abs: {
      AbsRunOptions abs_options;
      abs_options.initial_sharing = options.initial_sharing;
      abs_options.keep_periods = options.keep_periods;
      return run_abs(cfg, scenario, num_hyperperiods, abs_options);
    }
    case PolicyKind::DynamicProxy: {
      DynamicProxyOptions proxy_options;
      proxy_options.keep_periods = options.keep_periods;
      return run_dynamic_proxy(cfg, scenario, num_hyperperiods, proxy_options);
    }
    case PolicyKind::OptimalStaticStar: {
      const std::vector<PeriodSample> samples =
          scenario.collect(num_hyperperiods * cfg.periods_per_hyperperiod);
      const OptSsResult solved = solve_opt_ss_star(cfg, samples, options.opt_ss);
      return run_fixed_sharing(cfg, scenario, num_hyperperiods, solved.sharing,
                               "opt_ss_star", options.keep_periods);
    }
  }
  throw std::logic_error("unreachable policy kind");
}

}  // namespace bwshare
