#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mcsforge/aht.hpp"
#include "mcsforge/env.hpp"
#include "mcsforge/marl.hpp"

namespace mcsforge {

// Invalid or unknown configuration; mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  EnvConfig env;

  // generation block
  std::string method = "lbrdiv";  // lbrdiv | brdiv | lipo
  int K = 3;
  double tau = 1.0;
  double alpha = 0.0;  // baseline objective weight; required for brdiv/lipo
  bool alpha_set = false;
  TrainSchedule gen;

  // aht block
  AhtSchedule aht;

  // eval block
  std::vector<int> eval_heuristics;
  int eval_meta_episodes = 100;

  // runtime block
  std::vector<uint64_t> seeds = {1, 2, 3, 4};
  std::string out_dir;
  int64_t checkpoint_every = 0;  // steps between mid-run checkpoints; 0 = final only

  WeightMode weight_mode() const;
};

// per-environment defaults (population size, learning rates, tolerance,
// entropy weights, network widths, budgets). Baseline alpha defaults are
// applied only when `tuned_baseline_alpha` is set.
ExperimentConfig default_experiment_config(EnvId id, bool tuned_baseline_alpha = false);

// strict JSON parse: unknown keys anywhere are rejected; values overlay the
// per-env defaults selected by env.id
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         bool tuned_baseline_alpha = false);

std::string experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace mcsforge
