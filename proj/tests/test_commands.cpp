#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcsforge/commands.hpp"
#include "test_helpers.hpp"

using namespace mcsforge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "env": {"id": "matrix"},
    "generation": {"total_steps": 2000, "n_threads": 1,
                   "policy_hidden": [8], "critic_hidden": [8]},
    "aht": {"total_steps": 2000, "trunk_hidden": [8], "lstm_hidden": 4},
    "eval": {"heuristics": [1, 2], "meta_episodes_per_teammate": 4},
    "runtime": {"seeds": [3]}
  })");
  return cfg;
}

}  // namespace

TEST_CASE("output root resolution order") {
  CHECK(resolve_out_root("cli", "cfg") == "cli");
  CHECK(resolve_out_root("", "cfg") == "cfg");
  setenv("MCSFORGE_OUT", "/tmp/from_env", 1);
  CHECK(resolve_out_root("", "") == "/tmp/from_env");
  unsetenv("MCSFORGE_OUT");
  CHECK(resolve_out_root("", "") == "runs");
}

TEST_CASE("generate emits manifest, metrics, multipliers, and checkpoint") {
  testutil::TempDir tmp("generate");
  const auto dirs = cmd_generate(tiny_config(), tmp.str());
  REQUIRE(dirs.size() == 1);
  const fs::path run(dirs[0]);
  CHECK(run.string().find("generate_matrix_lbrdiv") != std::string::npos);
  CHECK(run.filename() == "seed_3");
  for (const char* f : {"manifest.json", "metrics.csv", "multipliers.csv",
                        "population.ckpt"})
    CHECK(fs::exists(run / f));

  const auto m = nlohmann::json::parse(slurp(run / "manifest.json"));
  CHECK(m.at("command") == "generate");
  CHECK(m.at("seed") == 3);
  CHECK(m.contains("config_hash"));
  CHECK(m.at("config").at("env").at("id") == "matrix");

  const std::string metrics = slurp(run / "metrics.csv");
  CHECK(metrics.rfind("step,pair_i,pair_j", 0) == 0);

  SUBCASE("xp-matrix, analyze, and plot consume the checkpoint") {
    const std::string xp =
        cmd_xp_matrix((run / "population.ckpt").string(), 10, 5, tmp.str());
    CHECK(fs::exists(fs::path(xp) / "xp_matrix.csv"));
    CHECK(fs::exists(fs::path(xp) / "xp_matrix_stderr.csv"));
    CHECK(fs::exists(fs::path(xp) / "xp_matrix.svg"));
    const ReturnMatrix R = ReturnMatrix::from_csv(slurp(fs::path(xp) / "xp_matrix.csv"));
    CHECK(R.K == 3);

    const std::string an =
        cmd_analyze((run / "population.ckpt").string(), 20, 5, tmp.str());
    CHECK(fs::exists(fs::path(an) / "behavior_profile.csv"));

    const std::string svg1 = (tmp.path / "metrics.svg").string();
    cmd_plot((run / "metrics.csv").string(), svg1);
    CHECK(slurp(svg1).rfind("<svg", 0) == 0);
    const std::string svg2 = (tmp.path / "xp.svg").string();
    cmd_plot((fs::path(xp) / "xp_matrix.csv").string(), svg2);
    CHECK(slurp(svg2).find("</svg>") != std::string::npos);
  }

  SUBCASE("rerun from the manifest reproduces the metrics byte-for-byte") {
    const std::string redo =
        cmd_rerun((run / "manifest.json").string(), (tmp.path / "redo").string());
    CHECK(slurp(fs::path(redo) / "metrics.csv") == slurp(run / "metrics.csv"));
    CHECK(slurp(fs::path(redo) / "population.ckpt") == slurp(run / "population.ckpt"));
  }
}

TEST_CASE("mcs command writes the coverage artifacts") {
  testutil::TempDir tmp("mcs");
  const std::string dir = cmd_mcs("matrix", 16, tmp.str());
  for (const char* f : {"coverage_report.txt", "coverage_report.csv",
                        "return_matrix.csv", "return_matrix.svg"})
    CHECK(fs::exists(fs::path(dir) / f));
  CHECK(slurp(fs::path(dir) / "coverage_report.txt").find("a1") != std::string::npos);
  CHECK_THROWS_AS(cmd_mcs("pluto", 16, tmp.str()), ConfigError);
}

TEST_CASE("train-aht and eval produce per-seed agents and a summary") {
  testutil::TempDir tmp("aht_cmd");
  ExperimentConfig cfg = tiny_config();
  const auto dirs = cmd_train_aht(cfg, "heuristics:1,2", tmp.str());
  REQUIRE(dirs.size() == 1);
  const fs::path run(dirs[0]);
  CHECK(fs::exists(run / "agent.ckpt"));
  CHECK(fs::exists(run / "aht_metrics.csv"));
  CHECK(slurp(run / "aht_metrics.csv").rfind("step,mean_return,return_ep0", 0) == 0);

  const std::string ev = cmd_eval(cfg, (run / "agent.ckpt").string(), tmp.str());
  CHECK(fs::exists(fs::path(ev) / "robustness_0.csv"));
  const auto summary = nlohmann::json::parse(slurp(fs::path(ev) / "summary.json"));
  CHECK(summary.at("n_seeds") == 1);
  CHECK(summary.at("teammate_sampling") == "fixed per meta-episode");
  CHECK(summary.contains("overall_mean"));

  // a directory of seed_*/agent.ckpt works too
  const std::string ev2 = cmd_eval(cfg, run.parent_path().string(), tmp.str());
  CHECK(fs::exists(fs::path(ev2) / "summary.json"));
}

TEST_CASE("command failures map to the documented error types") {
  testutil::TempDir tmp("errors");
  CHECK_THROWS_AS(cmd_rerun((tmp.path / "missing.json").string(), tmp.str()), IoError);
  const fs::path bogus = tmp.path / "bogus.json";
  {
    std::ofstream out(bogus);
    out << R"({"no": "manifest"})";
  }
  CHECK_THROWS_AS(cmd_rerun(bogus.string(), tmp.str()), ConfigError);
  CHECK_THROWS_AS(cmd_plot((tmp.path / "missing.csv").string(),
                           (tmp.path / "o.svg").string()),
                  IoError);
  const fs::path badcsv = tmp.path / "bad.csv";
  {
    std::ofstream out(badcsv);
    out << "x,y\n1,2\n";
  }
  CHECK_THROWS_AS(cmd_plot(badcsv.string(), (tmp.path / "o.svg").string()), ConfigError);
  CHECK_THROWS_AS(cmd_xp_matrix((tmp.path / "nothing.ckpt").string(), 4, 0, tmp.str()),
                  IoError);
  ExperimentConfig cfg = tiny_config();
  CHECK_THROWS_AS(cmd_train_aht(cfg, "robots:1", tmp.str()), ConfigError);
  CHECK_THROWS_AS(cmd_train_aht(cfg, "heuristics:", tmp.str()), ConfigError);
  CHECK_THROWS_AS(cmd_eval(cfg, (tmp.path / "empty_dir").string(), tmp.str()), IoError);
}
