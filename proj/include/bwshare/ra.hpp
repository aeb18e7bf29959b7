#pragma once

#include <vector>

#include "bwshare/types.hpp"

namespace bwshare {

// One arrived client of a resource-allocation cell.
struct CellClient {
  double capacity;  // bits per timeslot
  double queue;     // virtual-queue deficit P
};

// Per-(operator, region) allocation subproblem: minimize over tau >= 0
//   sum_n [ -V * Q_n(tau_n) + P_n * (q_min - Q_n(tau_n) + alpha)_+ ]
// subject to sum_n tau_n <= budget.
struct CellProblem {
  double budget = 0.0;
  std::vector<CellClient> clients;  // arrived clients only
  double v_weight = 1.0;
  double q_min = 0.3;
  double alpha = 0.008;
  QualityModel quality;
  int slots_per_period = 20;
};

struct CellSolution {
  std::vector<double> tau;  // one per CellProblem client
  double lambda = 0.0;      // dual of the budget constraint
};

// Objective value of the cell subproblem at a given allocation.
double cell_objective(const CellProblem& p, const std::vector<double>& tau);

// Minimizer of phi(tau) = -v*Q(tau) + queue*(q_min - Q(tau) + alpha)_+ + lambda*tau
// over tau >= 0, exploiting the closed form of the log quality model.
// lambda == 0 returns +infinity (the objective is unbounded below in tau).
double per_client_best_response(double lambda, double queue, double v, double capacity,
                                const QualityModel& model, int slots_per_period,
                                double q_min, double alpha);

// Exact solution of one cell via bisection on the budget dual.
CellSolution solve_cell(const CellProblem& p);

// Exhaustive grid minimization over the simplex (test oracle, <= 4 clients).
CellSolution brute_force_cell(const CellProblem& p, double grid_step);

// Whole-system RA problem for one period.
struct RaProblem {
  SystemConfig cfg;
  std::vector<double> budgets;  // per cell, SystemConfig::cell_index order
  PeriodSample sample;
  VirtualQueueLedger queues;
};

RaProblem make_ra_problem(const SystemConfig& cfg, const SharingMatrix& sharing,
                          const PeriodSample& sample, const VirtualQueueLedger& queues);

// Solves every (operator, region) cell independently. Clients without an
// arrival get tau = 0. Cells without arrivals report lambda = 0; cells with
// arrivals and zero budget report the left-end dual max_n w_n * Q'_n(0).
AllocationResult solve_ra(const RaProblem& problem);

// Grid oracle across all cells (test use only).
AllocationResult brute_force_ra(const RaProblem& problem, double grid_step);

// F_k objective value (drift-plus-penalty form) of an allocation.
double ra_objective(const RaProblem& problem, const AllocationResult& alloc);

// Sum of Q(tau)*A over all clients for one period.
double period_qoe(const SystemConfig& cfg, const PeriodSample& sample,
                  const AllocationResult& alloc);

// Time-averaged total QoE over a trace of (sample, allocation) pairs.
// Throws std::invalid_argument("no periods") on an empty trace.
double total_qoe(const SystemConfig& cfg,
                 const std::vector<std::pair<PeriodSample, AllocationResult>>& trace);

}  // namespace bwshare
