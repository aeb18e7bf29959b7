#include "bwshare/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "bwshare/quality.hpp"
#include "json.hpp"

namespace bwshare {

namespace {

using nlohmann::json;

ScenarioSpec mirrored_rates(const ScenarioSpec& base, const SystemConfig& cfg, double low,
                            double high) {
  ScenarioSpec spec = base;
  for (int i = 0; i < cfg.num_operators; ++i)
    for (int r = 0; r < cfg.num_regions; ++r)
      spec.arrival_rates[cfg.cell_index(i, r)] = ((i + r) % 2 == 0) ? low : high;
  return spec;
}

SystemConfig with_q_min(const SystemConfig& cfg, double q_min) {
  SystemConfig out = cfg;
  out.q_min = q_min;
  return out;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& fingerprint,
                    const std::string& command, const std::vector<std::string>& outputs,
                    const json& extra) {
  json manifest;
  manifest["tool"] = "bwshare";
  manifest["version"] = "1.0.0";
  manifest["command"] = command;
  manifest["seed"] = cfg.scenario.seed;
  manifest["config_fingerprint"] = fingerprint;
  manifest["policy"] = to_string(cfg.run.policy);
  manifest["horizon_hyperperiods"] = cfg.scenario.horizon_hyperperiods;
  manifest["outputs"] = outputs;
  if (!extra.is_null()) manifest["details"] = extra;
  write_file_atomic(cfg.run.out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& overrides) {
  if (overrides.policy) {
    try {
      cfg.run.policy = parse_policy(*overrides.policy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (overrides.seed) cfg.scenario.seed = *overrides.seed;
  if (overrides.horizon) {
    if (*overrides.horizon < 0) throw ConfigError("horizon must be >= 0");
    cfg.scenario.horizon_hyperperiods = *overrides.horizon;
  }
  if (overrides.out_dir) cfg.run.out_dir = *overrides.out_dir;
  if (overrides.detail) {
    if (*overrides.detail == "hyperperiod")
      cfg.run.detail = DetailLevel::Hyperperiod;
    else if (*overrides.detail == "period")
      cfg.run.detail = DetailLevel::Period;
    else
      throw ConfigError("detail must be 'hyperperiod' or 'period'");
  }
}

void run_experiment(const ExperimentConfig& cfg, const std::string& fingerprint) {
  // The no-sharing baseline runs with its own q_min convention.
  const SystemConfig system = cfg.run.policy == PolicyKind::NoSharing
                                  ? with_q_min(cfg.system, cfg.run.no_sharing_q_min)
                                  : cfg.system;
  const ScenarioEngine engine(system, cfg.scenario);
  PolicyRunOptions options;
  options.keep_periods = cfg.run.detail == DetailLevel::Period;
  options.initial_sharing = cfg.run.initial_sharing;
  options.opt_ss.max_iterations = cfg.run.opt_ss_max_iterations;
  options.opt_ss.grad_map_tol = cfg.run.opt_ss_grad_map_tol;

  json extra;
  if (cfg.run.policy == PolicyKind::OptimalStaticStar) {
    const std::vector<PeriodSample> samples = engine.collect(
        cfg.scenario.horizon_hyperperiods * system.periods_per_hyperperiod);
    const OptSsResult solved = solve_opt_ss_star(system, samples, options.opt_ss);
    extra["opt_ss_objective"] = solved.objective;
    extra["opt_ss_converged"] = solved.converged;
    extra["opt_ss_iterations"] = solved.iterations;
    const RunTrace trace =
        run_fixed_sharing(system, engine, cfg.scenario.horizon_hyperperiods,
                          solved.sharing, "opt_ss_star", options.keep_periods);
    std::vector<std::string> outputs = {"hyperperiod.csv", "clients.csv"};
    write_file_atomic(cfg.run.out_dir + "/hyperperiod.csv", hyperperiod_csv(system, trace));
    write_file_atomic(cfg.run.out_dir + "/clients.csv", clients_csv(trace));
    if (options.keep_periods) {
      write_file_atomic(cfg.run.out_dir + "/periods.csv", periods_csv(trace));
      outputs.push_back("periods.csv");
    }
    write_manifest(cfg, fingerprint, "run", outputs, extra);
    return;
  }

  const RunTrace trace = run_policy(system, engine, cfg.run.policy,
                                    cfg.scenario.horizon_hyperperiods, options);
  std::vector<std::string> outputs = {"hyperperiod.csv", "clients.csv"};
  write_file_atomic(cfg.run.out_dir + "/hyperperiod.csv", hyperperiod_csv(system, trace));
  write_file_atomic(cfg.run.out_dir + "/clients.csv", clients_csv(trace));
  if (options.keep_periods) {
    write_file_atomic(cfg.run.out_dir + "/periods.csv", periods_csv(trace));
    outputs.push_back("periods.csv");
  }
  write_manifest(cfg, fingerprint, "run", outputs, extra);
}

std::vector<CompareRow> run_compare(const ExperimentConfig& cfg) {
  if (cfg.run.compare_policies.size() < 2)
    throw ConfigError("compare requires at least two policies");
  std::vector<PolicyKind> kinds;
  for (const std::string& name : cfg.run.compare_policies) {
    try {
      kinds.push_back(parse_policy(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  const auto run_pair = [&](double low, double high) {
    std::vector<CompareRow> rows;
    const ScenarioSpec spec = mirrored_rates(cfg.scenario, cfg.system, low, high);
    const SystemConfig ns_system = with_q_min(cfg.system, cfg.run.no_sharing_q_min);
    const ScenarioEngine ns_engine(ns_system, spec);
    const RunTrace ns_trace = run_policy(ns_system, ns_engine, PolicyKind::NoSharing,
                                         cfg.scenario.horizon_hyperperiods, {});
    const ScenarioEngine engine(cfg.system, spec);
    for (PolicyKind kind : kinds) {
      PolicyRunOptions options;
      options.opt_ss.max_iterations = cfg.run.opt_ss_max_iterations;
      options.opt_ss.grad_map_tol = cfg.run.opt_ss_grad_map_tol;
      RunTrace trace;
      if (kind == PolicyKind::NoSharing) {
        trace = ns_trace;
      } else {
        trace = run_policy(cfg.system, engine, kind, cfg.scenario.horizon_hyperperiods,
                           options);
      }
      const Improvement imp = improvement_over_no_sharing(trace, ns_trace);
      rows.push_back({low, high, to_string(kind), trace.overall_qoe, ns_trace.overall_qoe,
                      imp.relative_valid ? imp.percent : imp.absolute,
                      imp.relative_valid});
    }
    return rows;
  };

  std::vector<std::future<std::vector<CompareRow>>> futures;
  for (const auto& [low, high] : cfg.run.compare_rate_pairs)
    futures.push_back(std::async(std::launch::async, run_pair, low, high));
  std::vector<CompareRow> rows;
  for (auto& f : futures) {
    std::vector<CompareRow> part = f.get();
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void write_compare(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows,
                   const std::string& fingerprint) {
  write_file_atomic(cfg.run.out_dir + "/compare.csv", compare_csv(rows));
  write_manifest(cfg, fingerprint, "compare", {"compare.csv"}, nullptr);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  for (double eta : cfg.run.sweep_step_sizes)
    if (eta < 0.0) throw ConfigError("sweep step sizes must be >= 0");

  const ScenarioEngine engine(cfg.system, cfg.scenario);
  const int horizon = cfg.scenario.horizon_hyperperiods;
  OptSsOptions opt_options;
  opt_options.max_iterations = cfg.run.opt_ss_max_iterations;
  opt_options.grad_map_tol = cfg.run.opt_ss_grad_map_tol;
  const OptSsResult opt = solve_opt_ss_star(
      cfg.system, engine.collect(horizon * cfg.system.periods_per_hyperperiod), opt_options);
  const double reference = opt.objective;

  struct Task {
    std::string label;
    SystemConfig system;
    std::optional<double> eta_override;
  };
  std::vector<Task> tasks;
  for (double eta : cfg.run.sweep_step_sizes)
    tasks.push_back({format_number(eta), cfg.system, eta});
  if (cfg.run.sweep_include_variable) {
    SystemConfig variable = cfg.system;
    variable.step_size = cfg.run.sweep_variable_eta0;
    variable.step_schedule = StepSchedule::InvSqrt;
    tasks.push_back({"variable", variable, std::nullopt});
  }

  const auto run_task = [&](const Task& task) {
    AbsRunOptions options;
    options.eta_override = task.eta_override;
    const RunTrace trace = run_abs(task.system, engine, horizon, options);
    std::vector<SweepRow> rows;
    for (const HyperRow& row : trace.hyper) {
      const double gap = std::abs(row.total_qoe - reference) /
                         std::max(std::abs(reference), 1e-12);
      rows.push_back({task.label, row.t, row.total_qoe, gap});
    }
    return rows;
  };

  std::vector<std::future<std::vector<SweepRow>>> futures;
  for (const Task& task : tasks)
    futures.push_back(std::async(std::launch::async, run_task, task));
  std::vector<SweepRow> rows;
  for (auto& f : futures) {
    std::vector<SweepRow> part = f.get();
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void write_sweep(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows,
                 const std::string& fingerprint) {
  write_file_atomic(cfg.run.out_dir + "/sweep.csv", sweep_csv(rows));
  write_manifest(cfg, fingerprint, "sweep", {"sweep.csv"}, nullptr);
}

ValidationReport validate_experiment(const ExperimentConfig& cfg) {
  ValidationReport report;
  try {
    cfg.system.validate();
    cfg.scenario.validate(cfg.system);
  } catch (const std::invalid_argument& e) {
    report.ok = false;
    report.messages.push_back(std::string("invalid: ") + e.what());
    return report;
  }
  report.messages.push_back("schema: ok");

  if (cfg.run.initial_sharing) {
    const MembershipReport membership =
        validate_sharing(*cfg.run.initial_sharing, cfg.system);
    if (!membership.member) {
      report.ok = false;
      for (const SharingViolation& v : membership.violations)
        report.messages.push_back("initial_sharing violates " + v.constraint +
                                  " by " + format_number(v.amount));
      return report;
    }
    report.messages.push_back("initial_sharing: in polytope");
  }

  // A client can never exceed the quality delivered by the entire region
  // budget; if q_min sits above that ceiling the hinge can never clear.
  double min_capacity = cfg.scenario.capacity_per_cell.front();
  for (double c : cfg.scenario.capacity_per_cell) min_capacity = std::min(min_capacity, c);
  const double full_budget =
      static_cast<double>(cfg.system.num_operators) * cfg.system.slots_per_period;
  const double ceiling =
      quality(full_budget, min_capacity, cfg.system.quality, cfg.system.slots_per_period);
  const double own_ceiling =
      quality(cfg.system.slots_per_period, min_capacity, cfg.system.quality,
              cfg.system.slots_per_period);
  report.messages.push_back("quality ceiling: own budget " + format_number(own_ceiling) +
                            ", full sharing " + format_number(ceiling));
  if (cfg.system.q_min + cfg.system.alpha > ceiling) {
    report.ok = false;
    report.messages.push_back(
        "infeasible q_min: hinge can never clear, virtual queues will grow without bound");
  }

  const int smoke_hyperperiods = 5;
  const ScenarioEngine engine(cfg.system, cfg.scenario);
  const RunTrace trace = run_abs(cfg.system, engine, smoke_hyperperiods, {});
  const int periods = smoke_hyperperiods * cfg.system.periods_per_hyperperiod;
  const double max_queue = trace.final_queues.max_value();
  const double slope = max_queue / periods;
  report.messages.push_back("smoke run: max queue " + format_number(max_queue) +
                            " after " + std::to_string(periods) + " periods (slope " +
                            format_number(slope) + " per period)");
  if (slope > 1.0) {
    report.ok = false;
    report.messages.push_back("growing queues: deficit grows by more than 1 quality unit "
                              "per period, q_min looks unreachable");
  }
  return report;
}

}  // namespace bwshare
