#include <doctest.h>

#include <string>

#include "mcsforge/config.hpp"
#include "mcsforge/svg.hpp"

using namespace mcsforge;

TEST_CASE("per-environment defaults carry the tuned hyperparameters") {
  const ExperimentConfig m = default_experiment_config(EnvId::RepeatedMatrix);
  CHECK(m.K == 3);
  CHECK(m.tau == 1.0);
  CHECK(m.gen.lr_pi == 1e-3);
  CHECK(m.gen.lr_alpha == 0.05);
  CHECK(m.gen.total_steps == 1000000);
  CHECK(m.gen.n_threads == 40);
  CHECK(m.gen.t_update == 2);
  CHECK(m.gen.t_lagrange == 10);
  CHECK(m.gen.w_ent == 1e-3);
  CHECK(m.gen.policy_hidden == std::vector<int>{32, 32});
  CHECK(m.eval_heuristics == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(m.aht.lstm_hidden == 16);

  const ExperimentConfig cr = default_experiment_config(EnvId::CoopReach);
  CHECK(cr.K == 4);
  CHECK(cr.tau == 0.2);
  CHECK(cr.gen.lr_pi == 1e-4);
  CHECK(cr.gen.lr_alpha == 0.5);
  CHECK(cr.gen.t_update == 8);
  CHECK(cr.gen.policy_hidden == std::vector<int>{128, 256, 256, 128});
  CHECK(cr.eval_heuristics.size() == 15);

  const ExperimentConfig wcr = default_experiment_config(EnvId::WeightedCoopReach);
  CHECK(wcr.tau == 0.5);

  const ExperimentConfig lbf = default_experiment_config(EnvId::LBF);
  CHECK(lbf.K == 6);
  CHECK(lbf.tau == 0.1);
  CHECK(lbf.gen.policy_hidden == std::vector<int>{128, 128});
  CHECK(lbf.aht.lstm_hidden == 64);
}

TEST_CASE("json overlays defaults and keeps the rest") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "env": {"id": "matrix"},
    "generation": {"total_steps": 200000, "n_threads": 8},
    "runtime": {"seeds": [1, 2]}
  })");
  CHECK(cfg.env.id == EnvId::RepeatedMatrix);
  CHECK(cfg.gen.total_steps == 200000);
  CHECK(cfg.gen.n_threads == 8);
  CHECK(cfg.gen.lr_pi == 1e-3);  // untouched default
  CHECK(cfg.method == "lbrdiv");
  CHECK(cfg.seeds == std::vector<uint64_t>{1, 2});
  CHECK(cfg.weight_mode() == WeightMode::Lagrangian);
}

TEST_CASE("strict parsing rejects malformed or unknown input") {
  CHECK_THROWS_AS(parse_experiment_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"generation": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"env": {"id": "mars"}})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"env": {"id": "matrix"}, "extra": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"env": {"id": "matrix", "color": "red"}})"),
      ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"env": {"id": "matrix"}, "generation": {"lr": 0.1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"env": {"id": "matrix"}, "runtime": {"seeds": []}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"env": {"id": "matrix"}, "generation": {"K": 0}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"env": {"id": "matrix"}, "generation": {"method": "xyz"}})"),
                  ConfigError);
}

TEST_CASE("baseline methods demand an explicit alpha unless defaults are requested") {
  const std::string brdiv = R"({"env": {"id": "matrix"}, "generation": {"method": "brdiv"}})";
  try {
    parse_experiment_config(brdiv);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("--use-tuned-defaults") != std::string::npos);
  }
  CHECK(parse_experiment_config(brdiv, true).alpha == 1.0);
  const std::string lipo = R"({"env": {"id": "matrix"}, "generation": {"method": "lipo"}})";
  CHECK(parse_experiment_config(lipo, true).alpha == 0.5);
  CHECK(parse_experiment_config(lipo, true).weight_mode() == WeightMode::LIPO);

  // an explicit alpha wins over the tuned default
  const ExperimentConfig ex = parse_experiment_config(
      R"({"env": {"id": "matrix"}, "generation": {"method": "brdiv", "alpha": 3.0}})", true);
  CHECK(ex.alpha == 3.0);
}

TEST_CASE("config json round-trips through the manifest form") {
  ExperimentConfig cfg = default_experiment_config(EnvId::WeightedCoopReach);
  cfg.method = "lipo";
  cfg.alpha = 0.25;
  cfg.alpha_set = true;
  cfg.seeds = {9, 10};
  cfg.gen.total_steps = 12345;
  const ExperimentConfig back = parse_experiment_config(experiment_config_to_json(cfg));
  CHECK(back.env.id == cfg.env.id);
  CHECK(back.method == cfg.method);
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.tau == cfg.tau);
  CHECK(back.seeds == cfg.seeds);
  CHECK(back.gen.total_steps == 12345);
  CHECK(back.aht.lstm_hidden == cfg.aht.lstm_hidden);
  CHECK(back.eval_heuristics == cfg.eval_heuristics);
}

TEST_CASE("svg plots are well-formed and carry their labels") {
  PlotSeries s1{"sp_return", {0, 100, 200}, {1.0, 2.0, 3.0}};
  PlotSeries s2{"xp_return", {0, 100, 200}, {3.0, 2.5, 2.0}};
  const std::string svg = svg_line_plot({s1, s2}, "training", "steps", "return");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("sp_return") != std::string::npos);
  CHECK(svg.find("xp_return") != std::string::npos);
  CHECK(svg.find("training") != std::string::npos);

  ReturnMatrix R(2);
  R.at(0, 0) = 10.0;
  R.at(1, 1) = 6.0;
  const std::string heat = svg_heatmap(R, {"pi_0", "pi_1"}, "matrix");
  CHECK(heat.rfind("<svg", 0) == 0);
  CHECK(heat.find("</svg>") != std::string::npos);
  CHECK(heat.find("pi_1") != std::string::npos);
  CHECK(heat.find("10") != std::string::npos);
}
