#include "bwshare/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bwshare {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& scope,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + scope + key + "'");
  }
}

const json& require_key(const json& obj, const std::string& scope, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("missing required field '" + scope + key + "'");
  return obj.at(key);
}

double as_number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError("field '" + name + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ConfigError("field '" + name + "' must be an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError("field '" + name + "' must be a string");
  return v.get<std::string>();
}

// Per-cell table given either as a scalar (applied everywhere) or a nested
// [operator][region] array.
std::vector<double> per_cell_values(const json& v, const std::string& name,
                                    const SystemConfig& cfg) {
  std::vector<double> out(cfg.cells(), 0.0);
  if (v.is_number()) {
    std::fill(out.begin(), out.end(), v.get<double>());
    return out;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != cfg.num_operators)
    throw ConfigError("field '" + name + "' must be a number or a [operator][region] array");
  for (int i = 0; i < cfg.num_operators; ++i) {
    const json& row = v.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cfg.num_regions)
      throw ConfigError("field '" + name + "' row " + std::to_string(i) +
                        " must have one entry per region");
    for (int r = 0; r < cfg.num_regions; ++r)
      out[cfg.cell_index(i, r)] = as_number(row.at(r), name);
  }
  return out;
}

QualityModel parse_quality(const json& q) {
  reject_unknown_keys(q, "system.quality.", {"gamma_q", "theta", "beta", "rate_unit_divisor"});
  QualityModel model;
  model.gamma_q = as_number(require_key(q, "system.quality.", "gamma_q"), "gamma_q");
  model.theta = as_number(require_key(q, "system.quality.", "theta"), "theta");
  model.beta = as_number(require_key(q, "system.quality.", "beta"), "beta");
  if (q.contains("rate_unit_divisor"))
    model.rate_unit_divisor = as_number(q.at("rate_unit_divisor"), "rate_unit_divisor");
  return model;
}

SystemConfig parse_system(const json& s) {
  reject_unknown_keys(s, "system.",
                      {"num_operators", "num_regions", "clients_per_cell",
                       "slots_per_period", "periods_per_hyperperiod", "balance_bound",
                       "q_min", "alpha", "v_weight", "step_size", "step_schedule",
                       "percentile", "quality"});
  SystemConfig cfg;
  cfg.num_operators = as_int(require_key(s, "system.", "num_operators"), "num_operators");
  cfg.num_regions = as_int(require_key(s, "system.", "num_regions"), "num_regions");
  cfg.clients_per_cell =
      as_int(require_key(s, "system.", "clients_per_cell"), "clients_per_cell");
  cfg.slots_per_period =
      as_int(require_key(s, "system.", "slots_per_period"), "slots_per_period");
  cfg.periods_per_hyperperiod = as_int(
      require_key(s, "system.", "periods_per_hyperperiod"), "periods_per_hyperperiod");
  cfg.balance_bound = as_number(require_key(s, "system.", "balance_bound"), "balance_bound");
  cfg.q_min = as_number(require_key(s, "system.", "q_min"), "q_min");
  cfg.alpha = as_number(require_key(s, "system.", "alpha"), "alpha");
  cfg.v_weight = as_number(require_key(s, "system.", "v_weight"), "v_weight");
  cfg.step_size = as_number(require_key(s, "system.", "step_size"), "step_size");
  if (s.contains("step_schedule")) {
    const std::string schedule = as_string(s.at("step_schedule"), "step_schedule");
    if (schedule == "constant")
      cfg.step_schedule = StepSchedule::Constant;
    else if (schedule == "inv_sqrt")
      cfg.step_schedule = StepSchedule::InvSqrt;
    else
      throw ConfigError("field 'system.step_schedule' must be 'constant' or 'inv_sqrt'");
  }
  if (s.contains("percentile")) cfg.percentile = as_number(s.at("percentile"), "percentile");
  cfg.quality = parse_quality(require_key(s, "system.", "quality"));
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid system config: ") + e.what());
  }
  return cfg;
}

ScenarioSpec parse_scenario(const json& s, const SystemConfig& cfg) {
  reject_unknown_keys(s, "scenario.",
                      {"seed", "horizon_hyperperiods", "arrival_rates",
                       "capacity_bits_per_slot", "regime_switches"});
  ScenarioSpec spec;
  const json& seed = require_key(s, "scenario.", "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw ConfigError("field 'scenario.seed' must be an integer");
  spec.seed = seed.get<uint64_t>();
  spec.horizon_hyperperiods = as_int(require_key(s, "scenario.", "horizon_hyperperiods"),
                                     "horizon_hyperperiods");
  spec.arrival_rates =
      per_cell_values(require_key(s, "scenario.", "arrival_rates"), "arrival_rates", cfg);
  spec.capacity_per_cell = per_cell_values(
      require_key(s, "scenario.", "capacity_bits_per_slot"), "capacity_bits_per_slot", cfg);
  if (s.contains("regime_switches")) {
    const json& switches = s.at("regime_switches");
    if (!switches.is_array())
      throw ConfigError("field 'scenario.regime_switches' must be an array");
    for (const json& sw : switches) {
      reject_unknown_keys(sw, "scenario.regime_switches[].",
                          {"at_hyperperiod", "arrival_rates", "capacity_bits_per_slot"});
      RegimeChange change;
      change.at_hyperperiod = as_int(
          require_key(sw, "scenario.regime_switches[].", "at_hyperperiod"), "at_hyperperiod");
      if (sw.contains("arrival_rates"))
        change.arrival_rates = per_cell_values(sw.at("arrival_rates"), "arrival_rates", cfg);
      if (sw.contains("capacity_bits_per_slot"))
        change.capacity_per_cell =
            per_cell_values(sw.at("capacity_bits_per_slot"), "capacity_bits_per_slot", cfg);
      spec.regime_switches.push_back(std::move(change));
    }
  }
  try {
    spec.validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return spec;
}

SharingMatrix parse_sharing(const json& v, const SystemConfig& cfg) {
  // [region][owner][recipient] nested array.
  SharingMatrix s(cfg.num_regions, cfg.num_operators, 0.0);
  if (!v.is_array() || static_cast<int>(v.size()) != cfg.num_regions)
    throw ConfigError("initial_sharing must be a [region][owner][recipient] array");
  for (int r = 0; r < cfg.num_regions; ++r) {
    const json& owners = v.at(r);
    if (!owners.is_array() || static_cast<int>(owners.size()) != cfg.num_operators)
      throw ConfigError("initial_sharing region " + std::to_string(r) + " shape mismatch");
    for (int j = 0; j < cfg.num_operators; ++j) {
      const json& row = owners.at(j);
      if (!row.is_array() || static_cast<int>(row.size()) != cfg.num_operators)
        throw ConfigError("initial_sharing owner row shape mismatch");
      for (int i = 0; i < cfg.num_operators; ++i)
        s.at(r, j, i) = as_number(row.at(i), "initial_sharing");
    }
  }
  return s;
}

RunSettings parse_run(const json& r, const SystemConfig& cfg) {
  reject_unknown_keys(r, "run.",
                      {"policy", "out_dir", "detail", "no_sharing_q_min", "initial_sharing",
                       "compare_rate_pairs", "compare_policies", "sweep_step_sizes",
                       "sweep_include_variable", "sweep_variable_eta0",
                       "opt_ss_max_iterations", "opt_ss_grad_map_tol"});
  RunSettings run;
  try {
    run.policy = parse_policy(as_string(require_key(r, "run.", "policy"), "policy"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  run.out_dir = as_string(require_key(r, "run.", "out_dir"), "out_dir");
  if (r.contains("detail")) {
    const std::string detail = as_string(r.at("detail"), "detail");
    if (detail == "hyperperiod")
      run.detail = DetailLevel::Hyperperiod;
    else if (detail == "period")
      run.detail = DetailLevel::Period;
    else
      throw ConfigError("field 'run.detail' must be 'hyperperiod' or 'period'");
  }
  if (r.contains("no_sharing_q_min"))
    run.no_sharing_q_min = as_number(r.at("no_sharing_q_min"), "no_sharing_q_min");
  if (r.contains("initial_sharing"))
    run.initial_sharing = parse_sharing(r.at("initial_sharing"), cfg);
  if (r.contains("compare_rate_pairs")) {
    run.compare_rate_pairs.clear();
    for (const json& pair : r.at("compare_rate_pairs")) {
      if (!pair.is_array() || pair.size() != 2)
        throw ConfigError("compare_rate_pairs entries must be [low, high] pairs");
      run.compare_rate_pairs.emplace_back(as_number(pair.at(0), "compare_rate_pairs"),
                                          as_number(pair.at(1), "compare_rate_pairs"));
    }
  }
  if (r.contains("compare_policies")) {
    run.compare_policies.clear();
    for (const json& p : r.at("compare_policies"))
      run.compare_policies.push_back(as_string(p, "compare_policies"));
  }
  if (r.contains("sweep_step_sizes")) {
    run.sweep_step_sizes.clear();
    for (const json& v : r.at("sweep_step_sizes")) {
      const double eta = as_number(v, "sweep_step_sizes");
      if (eta < 0.0) throw ConfigError("sweep_step_sizes entries must be >= 0");
      run.sweep_step_sizes.push_back(eta);
    }
  }
  if (r.contains("sweep_include_variable")) {
    if (!r.at("sweep_include_variable").is_boolean())
      throw ConfigError("field 'run.sweep_include_variable' must be a boolean");
    run.sweep_include_variable = r.at("sweep_include_variable").get<bool>();
  }
  if (r.contains("sweep_variable_eta0"))
    run.sweep_variable_eta0 = as_number(r.at("sweep_variable_eta0"), "sweep_variable_eta0");
  if (r.contains("opt_ss_max_iterations"))
    run.opt_ss_max_iterations = as_int(r.at("opt_ss_max_iterations"), "opt_ss_max_iterations");
  if (r.contains("opt_ss_grad_map_tol"))
    run.opt_ss_grad_map_tol = as_number(r.at("opt_ss_grad_map_tol"), "opt_ss_grad_map_tol");
  return run;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root, "", {"system", "scenario", "run"});
  ExperimentConfig cfg;
  cfg.system = parse_system(require_key(root, "", "system"));
  cfg.scenario = parse_scenario(require_key(root, "", "scenario"), cfg.system);
  cfg.run = parse_run(require_key(root, "", "run"), cfg.system);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string config_fingerprint(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace bwshare
