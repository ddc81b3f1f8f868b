#ifndef COLLIDE_SCENARIO_HPP
#define COLLIDE_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace collide {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Numerical knobs shared by every scenario. A zero tolerance means "use the
// scenario's own default"; dt_integration only matters for generator-based
// runs and may stay zero elsewhere.
struct NumericsConfig {
  double dt_collision = 0.0;
  int steps = 0;
  double dt_integration = 0.0;
  int truncation = 20;
  double tolerance = 0.0;
};

struct OutputConfig {
  std::vector<std::string> columns;  // empty selects every column
  int stride = 1;
};

// Parsed and validated run description. `model` carries the scenario's
// physical parameters as a flat name -> value map so that one config format
// serves every scenario family.
struct ScenarioConfig {
  std::string scenario;
  std::map<std::string, double> model;
  NumericsConfig numerics;
  OutputConfig outputs;
  std::uint64_t seed = 0;
  bool seed_in_config = false;
};

// Carries every violation found in one pass, not just the first. The
// what() string joins them with newlines for contexts that only show one.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& joined, std::vector<std::string> all)
      : std::runtime_error(joined), violations(std::move(all)) {}
  std::vector<std::string> violations;
};

ScenarioConfig parse_config(const std::string& text);

// Written next to each CSV so a run can be reproduced and its tolerances
// audited. Identical (config, seed, version) must give identical CSV bytes;
// the manifest itself is exempt because it records wall-clock time.
struct RunManifest {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::map<std::string, double> tolerances;
};

struct ScenarioOutcome {
  std::vector<std::string> csv_files;
  std::string manifest_file;
  bool check_passed = false;
  std::string check_detail;
};

ScenarioOutcome run_scenario(const ScenarioConfig& config,
                             const std::string& out_dir);

std::vector<std::string> bundled_scenarios();

// Complete config text for a bundled scenario, or a thrown ConfigError when
// the name is unknown. The CLI ships these so every scenario can run without
// the user writing a config first.
std::string bundled_config_text(const std::string& name);

// Which subcommand a scenario belongs to: "simulate", "trajectories",
// "thermo" or "nonmarkov".
std::string scenario_family(const std::string& name);

}  // namespace collide

#endif
