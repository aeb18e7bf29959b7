#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bwshare/baselines.hpp"
#include "bwshare/scenario.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DetailLevel { Hyperperiod, Period };

struct RunSettings {
  PolicyKind policy = PolicyKind::Abs;
  std::string out_dir = "out";
  DetailLevel detail = DetailLevel::Hyperperiod;
  double no_sharing_q_min = 0.0;  // q_min convention for the no-sharing baseline
  std::optional<SharingMatrix> initial_sharing;
  std::vector<std::pair<double, double>> compare_rate_pairs = {
      {0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}, {0.4, 0.6}, {0.5, 0.5}};
  std::vector<std::string> compare_policies = {"dynamic_proxy", "opt_ss_star", "abs"};
  std::vector<double> sweep_step_sizes = {0.1, 0.01, 0.0001};
  bool sweep_include_variable = true;
  double sweep_variable_eta0 = 0.1;
  int opt_ss_max_iterations = 250;
  double opt_ss_grad_map_tol = 1e-4;
};

struct ExperimentConfig {
  SystemConfig system;
  ScenarioSpec scenario;
  RunSettings run;
};

// Parses and schema-validates a JSON experiment config. Unknown keys are
// rejected; all core system/scenario fields are required. Throws ConfigError
// with the offending field named in the message.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

// FNV-1a hash of the raw config bytes, for the run manifest.
std::string config_fingerprint(const std::string& bytes);

}  // namespace bwshare
