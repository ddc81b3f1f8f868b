#include "collide/scenario.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

// Exit codes shared with the test suite: 0 ok, 1 config/usage, 2 runtime.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct SubcommandArgs {
  std::string config_path;
  std::string scenario;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int n_traj = 0;
  CLI::Option* n_traj_opt = nullptr;
};

void add_common_options(CLI::App* cmd, SubcommandArgs& args) {
  cmd->add_option("config", args.config_path,
                  "Path to a scenario config file (JSON)");
  cmd->add_option("--scenario", args.scenario,
                  "Run a bundled scenario by name instead of a config file");
  cmd->add_option("--out-dir", args.out_dir, "Directory for CSV and manifest")
      ->capture_default_str();
  args.seed_opt = cmd->add_option("--seed", args.seed,
                                  "Random seed (overrides config and environment)");
}

std::string load_config_text(const SubcommandArgs& args) {
  if (!args.config_path.empty() && !args.scenario.empty())
    throw collide::ConfigError(
        "give either a config file or --scenario, not both",
        {"give either a config file or --scenario, not both"});
  if (args.config_path.empty() && args.scenario.empty())
    throw collide::ConfigError("a config file or --scenario is required",
                               {"a config file or --scenario is required"});
  if (!args.scenario.empty()) return collide::bundled_config_text(args.scenario);

  std::ifstream f(args.config_path);
  if (!f)
    throw collide::ConfigError("cannot read config file '" + args.config_path + "'",
                               {"cannot read config file '" + args.config_path + "'"});
  std::ostringstream text;
  text << f.rdbuf();
  return text.str();
}

// Flag beats config beats COLLIDE_SEED beats zero.
void resolve_seed(collide::ScenarioConfig& cfg, const SubcommandArgs& args,
                  const char* env_seed) {
  if (args.seed_opt && args.seed_opt->count() > 0) {
    cfg.seed = args.seed;
  } else if (!cfg.seed_in_config && env_seed) {
    cfg.seed = std::strtoull(env_seed, nullptr, 10);
  }
}

int run_family(const std::string& family, const SubcommandArgs& args,
               const char* env_seed) {
  collide::ScenarioConfig cfg = collide::parse_config(load_config_text(args));
  const std::string expected = collide::scenario_family(cfg.scenario);
  if (expected != family) {
    std::cerr << "scenario '" << cfg.scenario << "' belongs to the '" << expected
              << "' subcommand\n";
    return kConfigError;
  }
  resolve_seed(cfg, args, env_seed);
  if (args.n_traj_opt && args.n_traj_opt->count() > 0)
    cfg.model["n_traj"] = double(args.n_traj);

  const collide::ScenarioOutcome outcome = collide::run_scenario(cfg, args.out_dir);
  for (const auto& f : outcome.csv_files) std::cout << "wrote " << f << "\n";
  std::cout << "wrote " << outcome.manifest_file << "\n";
  if (!outcome.check_passed) {
    std::cerr << "check FAIL: " << outcome.check_detail << "\n";
    return kRuntimeError;
  }
  std::cout << "check PASS: " << outcome.check_detail << "\n";
  return kOk;
}

int run_validate(const SubcommandArgs& args) {
  const collide::ScenarioConfig cfg = collide::parse_config(load_config_text(args));
  std::cout << "config ok: scenario '" << cfg.scenario << "' (family "
            << collide::scenario_family(cfg.scenario) << ")\n";
  return kOk;
}

int run_self_test(const std::string& out_dir, const char* env_seed) {
  bool all_passed = true;
  for (const auto& name : collide::bundled_scenarios()) {
    collide::ScenarioConfig cfg =
        collide::parse_config(collide::bundled_config_text(name));
    if (!cfg.seed_in_config && env_seed)
      cfg.seed = std::strtoull(env_seed, nullptr, 10);
    try {
      const collide::ScenarioOutcome outcome = collide::run_scenario(cfg, out_dir);
      std::cout << (outcome.check_passed ? "PASS " : "FAIL ") << name << ": "
                << outcome.check_detail << "\n";
      all_passed = all_passed && outcome.check_passed;
    } catch (const std::exception& e) {
      std::cout << "FAIL " << name << ": " << e.what() << "\n";
      all_passed = false;
    }
  }
  return all_passed ? kOk : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-model simulation scenarios"};
  app.set_version_flag("--version", collide::kToolkitVersion);
  app.require_subcommand(0, 1);

  bool self_test = false;
  std::string self_test_dir = ".";
  app.add_flag("--self-test", self_test,
               "Run every bundled scenario and report PASS/FAIL");
  app.add_option("--out-dir", self_test_dir,
                 "Directory for --self-test outputs")
      ->capture_default_str();

  SubcommandArgs simulate_args, trajectories_args, thermo_args, nonmarkov_args,
      validate_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Averaged collision or generator dynamics");
  add_common_options(simulate, simulate_args);
  CLI::App* trajectories =
      app.add_subcommand("trajectories", "Monte Carlo unravelings");
  add_common_options(trajectories, trajectories_args);
  trajectories_args.n_traj_opt =
      trajectories
          ->add_option("--n-traj", trajectories_args.n_traj,
                       "Number of trajectories (overrides the config)")
          ->check(CLI::PositiveNumber);
  CLI::App* thermo =
      app.add_subcommand("thermo", "Collision runs with the energy ledger");
  add_common_options(thermo, thermo_args);
  CLI::App* nonmarkov =
      app.add_subcommand("nonmarkov", "Memory effects and composite models");
  add_common_options(nonmarkov, nonmarkov_args);
  CLI::App* validate =
      app.add_subcommand("validate", "Check a config without running it");
  add_common_options(validate, validate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  const char* env_seed = std::getenv("COLLIDE_SEED");
  try {
    if (self_test) return run_self_test(self_test_dir, env_seed);
    if (simulate->parsed()) return run_family("simulate", simulate_args, env_seed);
    if (trajectories->parsed())
      return run_family("trajectories", trajectories_args, env_seed);
    if (thermo->parsed()) return run_family("thermo", thermo_args, env_seed);
    if (nonmarkov->parsed())
      return run_family("nonmarkov", nonmarkov_args, env_seed);
    if (validate->parsed()) return run_validate(validate_args);
  } catch (const collide::ConfigError& e) {
    for (const auto& v : e.violations) std::cerr << v << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }

  std::cout << app.help();
  return kOk;
}
