#pragma once

#include <string>
#include <vector>

#include "mcsforge/config.hpp"

namespace mcsforge {

// Resolution order for the output root: explicit argument, runtime block of
// the config, MCSFORGE_OUT, then ./runs.
std::string resolve_out_root(const std::string& explicit_dir, const std::string& config_dir);

// All commands throw ConfigError (exit 2), DivergenceError (exit 3) or
// IoError (exit 4); other exceptions map to exit 1.

// per-seed teammate generation: population checkpoint, metrics CSV,
// multiplier trace, run manifest
std::vector<std::string> cmd_generate(const ExperimentConfig& cfg,
                                      const std::string& out_root);

// rerun a single seed from its manifest; returns the produced run directory
std::string cmd_rerun(const std::string& manifest_path, const std::string& out_dir);

// Monte-Carlo cross-play matrix (+ standard errors) from a population checkpoint
std::string cmd_xp_matrix(const std::string& checkpoint_path, int episodes, uint64_t seed,
                          const std::string& out_root);

// exact coverage-set analysis for an environment's scripted-policy universe
std::string cmd_mcs(const std::string& env_name, int episodes_per_cell,
                    const std::string& out_root);

// teammates_spec: "heuristics:1,2,3" or "population:<checkpoint path>"
std::vector<std::string> cmd_train_aht(const ExperimentConfig& cfg,
                                       const std::string& teammates_spec,
                                       const std::string& out_root);

// robustness report for one trained agent checkpoint
std::string cmd_eval(const ExperimentConfig& cfg, const std::string& agent_path,
                     const std::string& out_root);

// behavior profile + heatmap for a population (or robustness summary for an agent)
std::string cmd_analyze(const std::string& checkpoint_path, int episodes, uint64_t seed,
                        const std::string& out_root);

// render a metrics CSV as an SVG line plot, or a matrix CSV as a heatmap
std::string cmd_plot(const std::string& csv_path, const std::string& out_path);

}  // namespace mcsforge
