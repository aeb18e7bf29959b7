#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bwshare/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::string policy;
  std::string out_dir;
  std::string detail;
  std::optional<uint64_t> seed;
  std::optional<int> horizon;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config JSON file")->required();
  cmd->add_option("--policy", args.policy,
                  "Policy override: no_sharing | opt_ss_star | dynamic_proxy | abs");
  cmd->add_option("--out-dir", args.out_dir, "Output directory override");
  cmd->add_option("--detail", args.detail, "Output detail: hyperperiod | period");
  cmd->add_option_function<uint64_t>(
      "--seed-override", [&args](uint64_t v) { args.seed = v; }, "Scenario seed override");
  cmd->add_option_function<int>(
      "--horizon", [&args](int v) { args.horizon = v; }, "Horizon override (hyperperiods)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bwshare::ConfigError("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct LoadedConfig {
  bwshare::ExperimentConfig cfg;
  std::string fingerprint;
};

LoadedConfig load_with_overrides(const CommonArgs& args) {
  const std::string bytes = read_file(args.config_path);
  bwshare::ExperimentConfig cfg = bwshare::parse_experiment_config(bytes);
  bwshare::CliOverrides overrides;
  if (!args.policy.empty()) overrides.policy = args.policy;
  if (!args.out_dir.empty()) overrides.out_dir = args.out_dir;
  if (!args.detail.empty()) overrides.detail = args.detail;
  overrides.seed = args.seed;
  overrides.horizon = args.horizon;
  bwshare::apply_overrides(cfg, overrides);
  return {std::move(cfg), bwshare::config_fingerprint(bytes)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-operator bandwidth-sharing simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, compare_args, sweep_args, validate_args;
  std::vector<std::string> compare_policies;
  std::vector<std::string> sweep_etas;

  CLI::App* run_cmd = app.add_subcommand("run", "Run one policy and write trace CSVs");
  add_common_options(run_cmd, run_args);

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Sweep arrival-rate pairs across policies");
  add_common_options(compare_cmd, compare_args);
  compare_cmd->add_option("--policies", compare_policies,
                          "Policies to compare (>= 2, overrides config)");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep-stepsize", "Step-size convergence study");
  add_common_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--etas", sweep_etas,
                        "Step sizes to sweep (numbers, or 'variable'; overrides config)");

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Schema, polytope and feasibility checks");
  add_common_options(validate_cmd, validate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      LoadedConfig loaded = load_with_overrides(run_args);
      try {
        bwshare::run_experiment(loaded.cfg, loaded.fingerprint);
      } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
      }
      std::cout << "wrote " << loaded.cfg.run.out_dir << "/hyperperiod.csv\n";
      return kExitOk;
    }
    if (compare_cmd->parsed()) {
      LoadedConfig loaded = load_with_overrides(compare_args);
      if (!compare_policies.empty()) loaded.cfg.run.compare_policies = compare_policies;
      if (loaded.cfg.run.compare_policies.size() < 2) {
        std::cerr << "config error: compare requires at least two policies\n";
        return kExitConfig;
      }
      try {
        const auto rows = bwshare::run_compare(loaded.cfg);
        bwshare::write_compare(loaded.cfg, rows, loaded.fingerprint);
      } catch (const bwshare::ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
      }
      std::cout << "wrote " << loaded.cfg.run.out_dir << "/compare.csv\n";
      return kExitOk;
    }
    if (sweep_cmd->parsed()) {
      LoadedConfig loaded = load_with_overrides(sweep_args);
      if (!sweep_etas.empty()) {
        loaded.cfg.run.sweep_step_sizes.clear();
        loaded.cfg.run.sweep_include_variable = false;
        for (const std::string& v : sweep_etas) {
          if (v == "variable") {
            loaded.cfg.run.sweep_include_variable = true;
          } else {
            try {
              const double eta = std::stod(v);
              if (eta < 0.0) throw bwshare::ConfigError("step sizes must be >= 0");
              loaded.cfg.run.sweep_step_sizes.push_back(eta);
            } catch (const std::invalid_argument&) {
              throw bwshare::ConfigError("invalid step size: " + v);
            }
          }
        }
      }
      try {
        const auto rows = bwshare::run_sweep(loaded.cfg);
        bwshare::write_sweep(loaded.cfg, rows, loaded.fingerprint);
      } catch (const bwshare::ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
      }
      std::cout << "wrote " << loaded.cfg.run.out_dir << "/sweep.csv\n";
      return kExitOk;
    }
    if (validate_cmd->parsed()) {
      LoadedConfig loaded = load_with_overrides(validate_args);
      const bwshare::ValidationReport report = bwshare::validate_experiment(loaded.cfg);
      for (const std::string& line : report.messages) std::cout << line << "\n";
      if (!report.ok) {
        std::cout << "validation: FAIL\n";
        return kExitConfig;
      }
      std::cout << "validation: PASS\n";
      return kExitOk;
    }
  } catch (const bwshare::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
