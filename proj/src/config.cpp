#include "mcsforge/config.hpp"

#include <json.hpp>

namespace mcsforge {

using nlohmann::json;

WeightMode ExperimentConfig::weight_mode() const {
  if (method == "lbrdiv") return WeightMode::Lagrangian;
  if (method == "brdiv") return WeightMode::BRDiv;
  if (method == "lipo") return WeightMode::LIPO;
  throw ConfigError("unknown generation method '" + method + "'");
}

ExperimentConfig default_experiment_config(EnvId id, bool tuned_baseline_alpha) {
  ExperimentConfig cfg;
  cfg.env = default_env_config(id);
  cfg.gen.gamma = 0.99;
  cfg.gen.t_lagrange = 10;
  cfg.aht.lr = 1e-4;
  cfg.aht.gamma = 0.99;
  switch (id) {
    case EnvId::RepeatedMatrix:
      cfg.K = 3;
      cfg.tau = 1.0;
      cfg.gen.lr_pi = 1e-3;
      cfg.gen.lr_v = 1e-3;
      cfg.gen.lr_alpha = 0.05;
      cfg.gen.total_steps = 1000000;
      cfg.gen.n_threads = 40;
      cfg.gen.t_update = 2;
      cfg.gen.w_ent = 1e-3;
      cfg.gen.policy_hidden = {32, 32};
      cfg.gen.critic_hidden = {32, 32};
      cfg.aht.total_steps = 1000000;
      cfg.aht.w_ent = 1e-4;
      cfg.aht.lstm_hidden = 16;
      cfg.aht.trunk_hidden = {32, 32};
      cfg.eval_heuristics = {1, 2, 3, 4, 5, 6};
      if (tuned_baseline_alpha) cfg.alpha = 1.0;  // brdiv; lipo override below
      break;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach:
      cfg.K = 4;
      cfg.tau = id == EnvId::CoopReach ? 0.2 : 0.5;
      cfg.gen.lr_pi = 1e-4;
      cfg.gen.lr_v = 1e-4;
      cfg.gen.lr_alpha = 0.5;
      cfg.gen.total_steps = 32000000;
      cfg.gen.n_threads = 160;
      cfg.gen.t_update = 8;
      cfg.gen.w_ent = 5e-3;
      cfg.gen.policy_hidden = {128, 256, 256, 128};
      cfg.gen.critic_hidden = {128, 256, 256, 128};
      cfg.aht.total_steps = 12000000;
      cfg.aht.w_ent = 2.5e-4;
      cfg.aht.lstm_hidden = 32;
      cfg.aht.trunk_hidden = {128, 256, 256, 128};
      cfg.eval_heuristics = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
      if (tuned_baseline_alpha) cfg.alpha = id == EnvId::CoopReach ? 10.0 : 1.0;
      break;
    case EnvId::LBF:
      cfg.K = 6;
      cfg.tau = 0.1;
      cfg.gen.lr_pi = 1e-4;
      cfg.gen.lr_v = 1e-4;
      cfg.gen.lr_alpha = 0.05;
      cfg.gen.total_steps = 240000000;
      cfg.gen.n_threads = 160;
      cfg.gen.t_update = 8;
      cfg.gen.w_ent = 8e-4;
      cfg.gen.policy_hidden = {128, 128};
      cfg.gen.critic_hidden = {128, 128};
      cfg.aht.total_steps = 48000000;
      cfg.aht.w_ent = 8e-4;
      cfg.aht.lstm_hidden = 64;
      cfg.aht.trunk_hidden = {128, 128};
      cfg.eval_heuristics = {1, 2, 3, 4, 5, 6, 7, 8};
      if (tuned_baseline_alpha) cfg.alpha = 0.4;
      break;
  }
  cfg.alpha_set = tuned_baseline_alpha;
  return cfg;
}

namespace {

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& block) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const auto& key : allowed)
      if (item.key() == key) ok = true;
    if (!ok)
      throw ConfigError("unknown key '" + item.key() + "' in " + block + " block");
  }
}

template <typename T>
void load(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

double tuned_baseline_alpha_for(EnvId id, const std::string& method) {
  if (method == "lipo") {
    switch (id) {
      case EnvId::RepeatedMatrix: return 0.5;
      case EnvId::CoopReach: return 8.0;
      case EnvId::WeightedCoopReach: return 0.25;
      case EnvId::LBF: return 0.08;
    }
  }
  switch (id) {  // brdiv
    case EnvId::RepeatedMatrix: return 1.0;
    case EnvId::CoopReach: return 10.0;
    case EnvId::WeightedCoopReach: return 1.0;
    case EnvId::LBF: return 0.4;
  }
  return 0.0;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         bool tuned_baseline_alpha) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(root, {"env", "generation", "aht", "eval", "runtime"}, "top-level");
  if (!root.contains("env") || !root.at("env").is_object() ||
      !root.at("env").contains("id"))
    throw ConfigError("config needs an env block with an 'id'");

  const json& env = root.at("env");
  reject_unknown(env, {"id", "grid_dim", "horizon", "num_items"}, "env");
  EnvId id;
  try {
    id = env_id_from_string(env.at("id").get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  ExperimentConfig cfg = default_experiment_config(id, false);
  load(env, "grid_dim", cfg.env.grid_dim);
  load(env, "horizon", cfg.env.horizon);
  load(env, "num_items", cfg.env.num_items);

  if (root.contains("generation")) {
    const json& gen = root.at("generation");
    reject_unknown(gen,
                   {"method", "K", "tau", "alpha", "total_steps", "n_threads", "t_update",
                    "t_lagrange", "clip_ratio", "ppo_epochs", "minibatches", "w_ent",
                    "gamma", "lr_pi", "lr_v", "lr_alpha", "target_sync_period",
                    "policy_hidden", "critic_hidden"},
                   "generation");
    load(gen, "method", cfg.method);
    load(gen, "K", cfg.K);
    load(gen, "tau", cfg.tau);
    if (gen.contains("alpha")) {
      load(gen, "alpha", cfg.alpha);
      cfg.alpha_set = true;
    }
    load(gen, "total_steps", cfg.gen.total_steps);
    load(gen, "n_threads", cfg.gen.n_threads);
    load(gen, "t_update", cfg.gen.t_update);
    load(gen, "t_lagrange", cfg.gen.t_lagrange);
    load(gen, "clip_ratio", cfg.gen.clip_ratio);
    load(gen, "ppo_epochs", cfg.gen.ppo_epochs);
    load(gen, "minibatches", cfg.gen.minibatches);
    load(gen, "w_ent", cfg.gen.w_ent);
    load(gen, "gamma", cfg.gen.gamma);
    load(gen, "lr_pi", cfg.gen.lr_pi);
    load(gen, "lr_v", cfg.gen.lr_v);
    load(gen, "lr_alpha", cfg.gen.lr_alpha);
    load(gen, "target_sync_period", cfg.gen.target_sync_period);
    load(gen, "policy_hidden", cfg.gen.policy_hidden);
    load(gen, "critic_hidden", cfg.gen.critic_hidden);
  }

  if (root.contains("aht")) {
    const json& aht = root.at("aht");
    reject_unknown(aht,
                   {"total_steps", "meta_episodes", "meta_batch", "gamma", "lr",
                    "clip_ratio", "ppo_epochs", "w_ent", "value_coef", "trunk_hidden",
                    "lstm_hidden"},
                   "aht");
    load(aht, "total_steps", cfg.aht.total_steps);
    load(aht, "meta_episodes", cfg.aht.meta_episodes);
    load(aht, "meta_batch", cfg.aht.meta_batch);
    load(aht, "gamma", cfg.aht.gamma);
    load(aht, "lr", cfg.aht.lr);
    load(aht, "clip_ratio", cfg.aht.clip_ratio);
    load(aht, "ppo_epochs", cfg.aht.ppo_epochs);
    load(aht, "w_ent", cfg.aht.w_ent);
    load(aht, "value_coef", cfg.aht.value_coef);
    load(aht, "trunk_hidden", cfg.aht.trunk_hidden);
    load(aht, "lstm_hidden", cfg.aht.lstm_hidden);
  }

  if (root.contains("eval")) {
    const json& ev = root.at("eval");
    reject_unknown(ev, {"heuristics", "meta_episodes_per_teammate"}, "eval");
    load(ev, "heuristics", cfg.eval_heuristics);
    load(ev, "meta_episodes_per_teammate", cfg.eval_meta_episodes);
  }

  if (root.contains("runtime")) {
    const json& rt = root.at("runtime");
    reject_unknown(rt, {"seeds", "out_dir", "checkpoint_every"}, "runtime");
    load(rt, "seeds", cfg.seeds);
    load(rt, "out_dir", cfg.out_dir);
    load(rt, "checkpoint_every", cfg.checkpoint_every);
  }

  cfg.weight_mode();  // validates method
  if (tuned_baseline_alpha && !cfg.alpha_set && cfg.method != "lbrdiv") {
    cfg.alpha = tuned_baseline_alpha_for(id, cfg.method);
    cfg.alpha_set = true;
  }
  if (cfg.method != "lbrdiv" && !cfg.alpha_set)
    throw ConfigError(
        "method '" + cfg.method +
        "' needs an objective weight 'alpha'; tuned per-environment defaults are "
        "available via --use-tuned-defaults");
  if (cfg.K < 1) throw ConfigError("K must be positive");
  if (cfg.gen.total_steps < 1 || cfg.aht.total_steps < 1)
    throw ConfigError("total_steps must be positive");
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  for (const auto& check : {cfg.gen.lr_pi, cfg.gen.lr_v, cfg.gen.lr_alpha, cfg.aht.lr})
    if (!(check > 0.0)) throw ConfigError("learning rates must be positive");
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["env"] = {{"id", env_id_to_string(cfg.env.id)},
                 {"grid_dim", cfg.env.grid_dim},
                 {"horizon", cfg.env.horizon},
                 {"num_items", cfg.env.num_items}};
  json gen = {{"method", cfg.method},
              {"K", cfg.K},
              {"tau", cfg.tau},
              {"total_steps", cfg.gen.total_steps},
              {"n_threads", cfg.gen.n_threads},
              {"t_update", cfg.gen.t_update},
              {"t_lagrange", cfg.gen.t_lagrange},
              {"clip_ratio", cfg.gen.clip_ratio},
              {"ppo_epochs", cfg.gen.ppo_epochs},
              {"minibatches", cfg.gen.minibatches},
              {"w_ent", cfg.gen.w_ent},
              {"gamma", cfg.gen.gamma},
              {"lr_pi", cfg.gen.lr_pi},
              {"lr_v", cfg.gen.lr_v},
              {"lr_alpha", cfg.gen.lr_alpha},
              {"target_sync_period", cfg.gen.target_sync_period},
              {"policy_hidden", cfg.gen.policy_hidden},
              {"critic_hidden", cfg.gen.critic_hidden}};
  if (cfg.alpha_set) gen["alpha"] = cfg.alpha;
  root["generation"] = gen;
  root["aht"] = {{"total_steps", cfg.aht.total_steps},
                 {"meta_episodes", cfg.aht.meta_episodes},
                 {"meta_batch", cfg.aht.meta_batch},
                 {"gamma", cfg.aht.gamma},
                 {"lr", cfg.aht.lr},
                 {"clip_ratio", cfg.aht.clip_ratio},
                 {"ppo_epochs", cfg.aht.ppo_epochs},
                 {"w_ent", cfg.aht.w_ent},
                 {"value_coef", cfg.aht.value_coef},
                 {"trunk_hidden", cfg.aht.trunk_hidden},
                 {"lstm_hidden", cfg.aht.lstm_hidden}};
  root["eval"] = {{"heuristics", cfg.eval_heuristics},
                  {"meta_episodes_per_teammate", cfg.eval_meta_episodes}};
  root["runtime"] = {{"seeds", cfg.seeds},
                     {"out_dir", cfg.out_dir},
                     {"checkpoint_every", cfg.checkpoint_every}};
  return root.dump(2);
}

}  // namespace mcsforge
