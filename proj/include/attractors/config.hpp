#pragma once

#include "attractors/constructors.hpp"
#include "attractors/io.hpp"

namespace attr {

// Named entry points shared by the CLI and the config files.
//   torus, sphere: build_*_attractor(n, d)
//   any:           connected sum of a gradient-like base (base = gradient | north_south) on n
//                  dimensions with the sphere attractor of dimension d
//   suspension:    suspension of build_torus_attractor(n, d)
//   cat, da, plykin, north_south, rotation: the base systems (n used by north_south)
SystemPtr build_family(const std::string& family, int n, int d, const std::string& base = "gradient");

struct AnalysisStep {
  std::string kind;
  std::map<std::string, std::string> params;
};

struct ExperimentConfig {
  std::string family;  // empty when a recipe is given
  int n = 2, d = 1;
  std::string base = "gradient";
  std::optional<RecipeNode> recipe;
  std::uint64_t seed = 1;
  std::string output = "out";
  long max_steps = 100000000;
  long max_points = 10000000;
  std::map<std::string, std::map<std::string, std::string>> sections;  // per-analysis parameters
  std::vector<std::string> analyses;                                  // in declared order
};

// Strict parsing: unknown sections or keys raise ConfigError before any computation.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

SystemPtr build_system(const ExperimentConfig& cfg);

struct RunResult {
  int exit_code = 0;  // 0 all pass, 1 some analysis failed
  Report summary;
  std::string verdict;  // expanding verdict, if requested
};

// Runs the analyses in order, writing one report per analysis plus summary.txt and
// recipe.ini into cfg.output.
RunResult run_experiment(const ExperimentConfig& cfg, const SystemPtr& sys);

}  // namespace attr
