// Command-line front end; talks to the shared library through the C API only.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcsforge.h"

namespace {

int fail(int code) {
  std::fprintf(stderr, "error: %s\n", mcsf_last_error());
  return code;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcsforge: constrained teammate generation and ad hoc teamwork tools"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, env_name, teammates_spec, csv_path,
      svg_path, manifest_path, agent_path;
  bool tuned_defaults = false;
  int episodes = 0;
  std::uint64_t seed = 0;

  auto add_config = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
    if (required) opt->required();
    cmd->add_option("--out", out_dir, "output root (default: config, then $MCSFORGE_OUT)");
    cmd->add_flag("--use-tuned-defaults", tuned_defaults,
                  "fill tuned per-environment defaults, including baseline alpha");
  };

  auto* generate = app.add_subcommand("generate", "train a teammate population per seed");
  add_config(generate, true);

  auto* rerun = app.add_subcommand("rerun", "reproduce a run from its manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json of a previous run")
      ->required();
  rerun->add_option("--out", out_dir, "directory for the reproduced run")->required();

  auto* xp = app.add_subcommand("xp-matrix", "Monte-Carlo cross-play matrix");
  xp->add_option("--checkpoint", checkpoint, "population checkpoint")->required();
  xp->add_option("--episodes", episodes, "episodes per matrix cell (default 100)");
  xp->add_option("--seed", seed, "evaluation seed");
  xp->add_option("--out", out_dir, "output root");

  auto* mcs = app.add_subcommand("mcs", "exact coverage-set analysis");
  mcs->add_option("--env", env_name, "matrix | coop_reach | weighted_coop_reach | lbf")
      ->required();
  mcs->add_option("--episodes", episodes, "episodes per matrix cell (default 256)");
  mcs->add_option("--out", out_dir, "output root");

  auto* train = app.add_subcommand("train-aht", "train the adaptive agent per seed");
  add_config(train, true);
  train
      ->add_option("--teammates", teammates_spec,
                   "'heuristics:1,2,3' or 'population:<checkpoint>'")
      ->required();

  auto* eval = app.add_subcommand("eval", "robustness evaluation of trained agents");
  add_config(eval, true);
  eval->add_option("--agent", agent_path,
                   "agent checkpoint, or a directory of seed_*/agent.ckpt")
      ->required();

  auto* analyze = app.add_subcommand("analyze", "behavior profile for a population");
  analyze->add_option("--checkpoint", checkpoint, "population checkpoint")->required();
  analyze->add_option("--episodes", episodes, "episodes to profile (default 1000)");
  analyze->add_option("--seed", seed, "evaluation seed");
  analyze->add_option("--out", out_dir, "output root");

  auto* plot = app.add_subcommand("plot", "render a metrics or matrix CSV as SVG");
  plot->add_option("--input", csv_path, "CSV produced by this tool")->required();
  plot->add_option("--output", svg_path, "SVG file to write")->required();

  CLI11_PARSE(app, argc, argv);

  std::string config_text;
  if (!config_path.empty() && !read_file(config_path, config_text)) {
    std::fprintf(stderr, "error: cannot read config file %s\n", config_path.c_str());
    return 4;
  }
  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();

  int rc = 0;
  if (generate->parsed()) {
    rc = mcsf_run_generate(config_text.c_str(), tuned_defaults ? 1 : 0, out);
  } else if (rerun->parsed()) {
    rc = mcsf_run_rerun(manifest_path.c_str(), out_dir.c_str());
  } else if (xp->parsed()) {
    rc = mcsf_run_xp_matrix(checkpoint.c_str(), episodes, seed, out);
  } else if (mcs->parsed()) {
    rc = mcsf_run_mcs(env_name.c_str(), episodes, out);
  } else if (train->parsed()) {
    rc = mcsf_run_train_aht(config_text.c_str(), tuned_defaults ? 1 : 0,
                            teammates_spec.c_str(), out);
  } else if (eval->parsed()) {
    rc = mcsf_run_eval(config_text.c_str(), tuned_defaults ? 1 : 0, agent_path.c_str(),
                       out);
  } else if (analyze->parsed()) {
    rc = mcsf_run_analyze(checkpoint.c_str(), episodes, seed, out);
  } else if (plot->parsed()) {
    rc = mcsf_run_plot(csv_path.c_str(), svg_path.c_str());
  }
  return rc == 0 ? 0 : fail(rc);
}
