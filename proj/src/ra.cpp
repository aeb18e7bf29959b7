#include "bwshare/ra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bwshare/quality.hpp"

namespace bwshare {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double cell_objective(const CellProblem& p, const std::vector<double>& tau) {
  if (tau.size() != p.clients.size())
    throw std::invalid_argument("allocation size mismatch");
  double obj = 0.0;
  for (size_t n = 0; n < tau.size(); ++n) {
    const double q = quality(tau[n], p.clients[n].capacity, p.quality, p.slots_per_period);
    obj += -p.v_weight * q + p.clients[n].queue * hinge(q, p.q_min, p.alpha);
  }
  return obj;
}

double per_client_best_response(double lambda, double queue, double v, double capacity,
                                const QualityModel& model, int slots_per_period,
                                double q_min, double alpha) {
  if (lambda <= 0.0) return kInf;
  const double s = capacity / (slots_per_period * model.rate_unit_divisor);
  // Stationary point of -w*Q(tau) + lambda*tau for utility weight w.
  const auto stationary = [&](double w) { return w / (model.gamma_q * lambda) - model.theta / s; };
  if (queue <= 0.0) return std::max(stationary(v), 0.0);
  const double tau_th = quality_inverse(q_min + alpha, capacity, model, slots_per_period);
  if (tau_th <= 0.0) return std::max(stationary(v), 0.0);
  const double low = stationary(v + queue);  // hinge active below tau_th
  if (low <= tau_th) return std::max(low, 0.0);
  const double high = stationary(v);
  if (high >= tau_th) return high;
  return tau_th;  // lambda lies in the subdifferential gap at the kink
}

CellSolution solve_cell(const CellProblem& p) {
  if (p.budget < 0.0) throw std::invalid_argument("negative budget");
  const size_t m = p.clients.size();
  CellSolution sol;
  sol.tau.assign(m, 0.0);
  if (m == 0) {
    sol.lambda = 0.0;
    return sol;
  }
  for (const CellClient& c : p.clients)
    if (!std::isfinite(c.capacity) || c.capacity <= 0.0)
      throw std::invalid_argument("capacity must be finite and > 0");

  // Marginal utility at tau = 0; the effective weight there is (V + P) when
  // the hinge is active near zero, V otherwise.
  double lambda_hi = 0.0;
  for (const CellClient& c : p.clients) {
    const double tau_th =
        quality_inverse(p.q_min + p.alpha, c.capacity, p.quality, p.slots_per_period);
    const double w0 = p.v_weight + (c.queue > 0.0 && tau_th > 0.0 ? c.queue : 0.0);
    lambda_hi = std::max(lambda_hi,
                         w0 * quality_slope(0.0, c.capacity, p.quality, p.slots_per_period));
  }

  if (p.budget == 0.0) {
    sol.lambda = lambda_hi;
    return sol;
  }

  const auto response_sum = [&](double lambda) {
    double sum = 0.0;
    for (const CellClient& c : p.clients)
      sum += per_client_best_response(lambda, c.queue, p.v_weight, c.capacity, p.quality,
                                      p.slots_per_period, p.q_min, p.alpha);
    return sum;
  };

  // The log utility is strictly increasing, so the budget binds and the map
  // lambda -> response_sum(lambda) is strictly decreasing on (0, lambda_hi].
  double lo = std::min(1.0, 0.5 * lambda_hi);
  int guard = 0;
  while (response_sum(lo) <= p.budget) {
    lo *= 0.5;
    if (++guard > 200) throw std::runtime_error("ra bisection bracket failed");
  }
  double hi = lambda_hi;

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (response_sum(mid) > p.budget)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * std::max(hi, 1.0)) break;
  }

  sol.lambda = hi;  // feasible side: response sum <= budget
  double total = 0.0;
  for (size_t n = 0; n < m; ++n) {
    sol.tau[n] = per_client_best_response(hi, p.clients[n].queue, p.v_weight,
                                          p.clients[n].capacity, p.quality,
                                          p.slots_per_period, p.q_min, p.alpha);
    total += sol.tau[n];
  }
  if (std::abs(total - p.budget) > 1e-8 * std::max(1.0, p.budget))
    throw std::runtime_error("ra bisection did not converge");
  return sol;
}

namespace {

// Enumerates the first m-1 allocations on the grid; the last client takes the
// remainder (the objective is strictly decreasing in every tau, so the
// optimum lies on the face sum(tau) == budget).
void enumerate_grid(const CellProblem& p, double grid_step, size_t index,
                    std::vector<double>& current, double used, std::vector<double>& best,
                    double& best_obj) {
  const size_t m = p.clients.size();
  if (index + 1 == m) {
    current[index] = p.budget - used;
    const double obj = cell_objective(p, current);
    if (obj < best_obj) {
      best_obj = obj;
      best = current;
    }
    return;
  }
  for (double t = 0.0; t <= p.budget - used + 1e-12; t += grid_step) {
    current[index] = std::min(t, p.budget - used);
    enumerate_grid(p, grid_step, index + 1, current, used + current[index], best, best_obj);
  }
}

}  // namespace

CellSolution brute_force_cell(const CellProblem& p, double grid_step) {
  if (p.clients.size() > 4) throw std::invalid_argument("oracle scale exceeded");
  if (grid_step <= 0.0) throw std::invalid_argument("grid_step must be > 0");
  CellSolution sol;
  sol.lambda = 0.0;
  sol.tau.assign(p.clients.size(), 0.0);
  if (p.clients.empty() || p.budget <= 0.0) return sol;
  std::vector<double> current(p.clients.size(), 0.0);
  double best_obj = kInf;
  enumerate_grid(p, grid_step, 0, current, 0.0, sol.tau, best_obj);
  return sol;
}

RaProblem make_ra_problem(const SystemConfig& cfg, const SharingMatrix& sharing,
                          const PeriodSample& sample, const VirtualQueueLedger& queues) {
  RaProblem problem{cfg, std::vector<double>(cfg.cells(), 0.0), sample, queues};
  for (int i = 0; i < cfg.num_operators; ++i)
    for (int r = 0; r < cfg.num_regions; ++r)
      problem.budgets[cfg.cell_index(i, r)] = sharing.recipient_budget(r, i);
  return problem;
}

namespace {

CellProblem build_cell(const RaProblem& problem, int op, int region,
                       std::vector<int>& member_index) {
  const SystemConfig& cfg = problem.cfg;
  CellProblem cell;
  cell.budget = problem.budgets[cfg.cell_index(op, region)];
  cell.v_weight = cfg.v_weight;
  cell.q_min = cfg.q_min;
  cell.alpha = cfg.alpha;
  cell.quality = cfg.quality;
  cell.slots_per_period = cfg.slots_per_period;
  member_index.clear();
  for (int n = 0; n < cfg.clients_per_cell; ++n) {
    const int c = cfg.client_index(op, region, n);
    if (problem.sample.arrivals[c]) {
      cell.clients.push_back({problem.sample.capacities[c], problem.queues.p[c]});
      member_index.push_back(c);
    }
  }
  return cell;
}

template <typename CellSolver>
AllocationResult solve_all_cells(const RaProblem& problem, CellSolver&& solver) {
  const SystemConfig& cfg = problem.cfg;
  AllocationResult result;
  result.tau.assign(cfg.total_clients(), 0.0);
  result.duals.assign(cfg.cells(), 0.0);
  std::vector<int> member_index;
  for (int i = 0; i < cfg.num_operators; ++i)
    for (int r = 0; r < cfg.num_regions; ++r) {
      const CellProblem cell = build_cell(problem, i, r, member_index);
      if (cell.budget < 0.0) throw std::invalid_argument("negative budget");
      const CellSolution sol = solver(cell);
      result.duals[cfg.cell_index(i, r)] = sol.lambda;
      for (size_t k = 0; k < member_index.size(); ++k)
        result.tau[member_index[k]] = sol.tau[k];
    }
  return result;
}

}  // namespace

AllocationResult solve_ra(const RaProblem& problem) {
  return solve_all_cells(problem, [](const CellProblem& c) { return solve_cell(c); });
}

AllocationResult brute_force_ra(const RaProblem& problem, double grid_step) {
  return solve_all_cells(problem, [grid_step](const CellProblem& c) {
    return brute_force_cell(c, grid_step);
  });
}

double ra_objective(const RaProblem& problem, const AllocationResult& alloc) {
  const SystemConfig& cfg = problem.cfg;
  double obj = 0.0;
  for (int c = 0; c < cfg.total_clients(); ++c) {
    if (!problem.sample.arrivals[c]) continue;
    const double q = quality(alloc.tau[c], problem.sample.capacities[c], cfg.quality,
                             cfg.slots_per_period);
    obj += -cfg.v_weight * q + problem.queues.p[c] * hinge(q, cfg.q_min, cfg.alpha);
  }
  return obj;
}

double period_qoe(const SystemConfig& cfg, const PeriodSample& sample,
                  const AllocationResult& alloc) {
  double qoe = 0.0;
  for (int c = 0; c < cfg.total_clients(); ++c) {
    if (!sample.arrivals[c]) continue;
    qoe += quality(alloc.tau[c], sample.capacities[c], cfg.quality, cfg.slots_per_period);
  }
  return qoe;
}

double total_qoe(const SystemConfig& cfg,
                 const std::vector<std::pair<PeriodSample, AllocationResult>>& trace) {
  if (trace.empty()) throw std::invalid_argument("no periods");
  double sum = 0.0;
  for (const auto& [sample, alloc] : trace) sum += period_qoe(cfg, sample, alloc);
  return sum / static_cast<double>(trace.size());
}

}  // namespace bwshare
