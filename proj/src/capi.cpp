#include "mcsforge.h"

#include <cstring>
#include <string>

#include "mcsforge/commands.hpp"
#include "mcsforge/diversity.hpp"
#include "mcsforge/env.hpp"
#include "mcsforge/marl.hpp"

namespace {

thread_local std::string g_last_error = "";

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return MCSF_OK;
  } catch (const mcsforge::ConfigError& e) {
    return set_error(MCSF_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(MCSF_ERR_CONFIG, e.what());
  } catch (const mcsforge::DivergenceError& e) {
    return set_error(MCSF_ERR_DIVERGENCE, e.what());
  } catch (const mcsforge::IoError& e) {
    return set_error(MCSF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(MCSF_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(MCSF_ERR_RUNTIME, "unknown error");
  }
}

std::string or_empty(const char* s) { return s ? s : ""; }

mcsforge::ReturnMatrix matrix_from_buffer(const double* values, int k) {
  if (!values || k < 1) throw mcsforge::ConfigError("matrix buffer is null or k < 1");
  mcsforge::ReturnMatrix R(k);
  std::memcpy(R.values.data(), values, sizeof(double) * static_cast<size_t>(k) * k);
  return R;
}

mcsforge::LagrangeSet lagrange_from_buffers(int k, double tau, const double* a1,
                                            const double* a2) {
  if (!a1 || !a2) throw mcsforge::ConfigError("multiplier buffer is null");
  mcsforge::LagrangeSet A(k, tau);
  const size_t n = static_cast<size_t>(k) * k;
  std::memcpy(A.alpha1.data(), a1, sizeof(double) * n);
  std::memcpy(A.alpha2.data(), a2, sizeof(double) * n);
  return A;
}

}  // namespace

struct mcsf_env {
  mcsforge::EnvInstance instance;
  explicit mcsf_env(const mcsforge::EnvConfig& cfg) : instance(cfg) {}
};

extern "C" {

const char* mcsf_last_error(void) { return g_last_error.c_str(); }

const char* mcsf_version(void) { return "0.1.0"; }

mcsf_env* mcsf_env_create(const char* env_id, int grid_dim, int horizon, int num_items) {
  mcsf_env* out = nullptr;
  guarded([&] {
    if (!env_id) throw mcsforge::ConfigError("env_id is null");
    mcsforge::EnvConfig cfg =
        mcsforge::default_env_config(mcsforge::env_id_from_string(env_id));
    if (grid_dim > 0) cfg.grid_dim = grid_dim;
    if (horizon > 0) cfg.horizon = horizon;
    if (num_items > 0) cfg.num_items = num_items;
    out = new mcsf_env(cfg);
  });
  return out;
}

void mcsf_env_destroy(mcsf_env* env) { delete env; }

int mcsf_env_obs_size(const mcsf_env* env) {
  return env ? env->instance.obs_size() : -1;
}

int mcsf_env_num_actions(const mcsf_env* env) {
  return env ? env->instance.num_actions() : -1;
}

int mcsf_env_reset(mcsf_env* env, uint64_t seed, double* obs_a, double* obs_b) {
  return guarded([&] {
    if (!env) throw mcsforge::ConfigError("env handle is null");
    const auto obs = env->instance.reset(seed);
    if (obs_a) std::memcpy(obs_a, obs.obs_a.data(), sizeof(double) * obs.obs_a.size());
    if (obs_b) std::memcpy(obs_b, obs.obs_b.data(), sizeof(double) * obs.obs_b.size());
  });
}

int mcsf_env_step(mcsf_env* env, int action_a, int action_b, double* obs_a,
                  double* obs_b, double* reward, int* done) {
  return guarded([&] {
    if (!env) throw mcsforge::ConfigError("env handle is null");
    const auto res = env->instance.step(action_a, action_b);
    if (obs_a)
      std::memcpy(obs_a, res.obs.obs_a.data(), sizeof(double) * res.obs.obs_a.size());
    if (obs_b)
      std::memcpy(obs_b, res.obs.obs_b.data(), sizeof(double) * res.obs.obs_b.size());
    if (reward) *reward = res.reward;
    if (done) *done = res.done ? 1 : 0;
  });
}

int mcsf_brdiv_objective(const double* matrix, int k, double alpha, double* out) {
  return guarded([&] {
    if (!out) throw mcsforge::ConfigError("output pointer is null");
    *out = mcsforge::brdiv_objective(matrix_from_buffer(matrix, k), alpha);
  });
}

int mcsf_lipo_objective(const double* matrix, int k, double alpha, double* out) {
  return guarded([&] {
    if (!out) throw mcsforge::ConfigError("output pointer is null");
    *out = mcsforge::lipo_objective(matrix_from_buffer(matrix, k), alpha);
  });
}

int mcsf_lagrange_dual(const double* matrix, int k, double tau, const double* alpha1,
                       const double* alpha2, double* out) {
  return guarded([&] {
    if (!out) throw mcsforge::ConfigError("output pointer is null");
    *out = mcsforge::lagrange_dual_value(matrix_from_buffer(matrix, k),
                                         lagrange_from_buffers(k, tau, alpha1, alpha2));
  });
}

int mcsf_pair_weight(int k, double tau, const double* alpha1, const double* alpha2,
                     int i, int j, double* out) {
  return guarded([&] {
    if (!out) throw mcsforge::ConfigError("output pointer is null");
    *out = mcsforge::pair_weight(lagrange_from_buffers(k, tau, alpha1, alpha2), i, j);
  });
}

int mcsf_run_generate(const char* config_json, int use_tuned_defaults,
                      const char* out_dir) {
  return guarded([&] {
    const auto cfg = mcsforge::parse_experiment_config(or_empty(config_json),
                                                       use_tuned_defaults != 0);
    mcsforge::cmd_generate(cfg, mcsforge::resolve_out_root(or_empty(out_dir), cfg.out_dir));
  });
}

int mcsf_run_rerun(const char* manifest_path, const char* out_dir) {
  return guarded([&] {
    if (!manifest_path || !out_dir)
      throw mcsforge::ConfigError("manifest path and output directory are required");
    mcsforge::cmd_rerun(manifest_path, out_dir);
  });
}

int mcsf_run_xp_matrix(const char* checkpoint_path, int episodes, uint64_t seed,
                       const char* out_dir) {
  return guarded([&] {
    if (!checkpoint_path) throw mcsforge::ConfigError("checkpoint path is required");
    mcsforge::cmd_xp_matrix(checkpoint_path, episodes > 0 ? episodes : 100, seed,
                            mcsforge::resolve_out_root(or_empty(out_dir), ""));
  });
}

int mcsf_run_mcs(const char* env_id, int episodes_per_cell, const char* out_dir) {
  return guarded([&] {
    mcsforge::cmd_mcs(or_empty(env_id), episodes_per_cell > 0 ? episodes_per_cell : 256,
                      mcsforge::resolve_out_root(or_empty(out_dir), ""));
  });
}

int mcsf_run_train_aht(const char* config_json, int use_tuned_defaults,
                       const char* teammates_spec, const char* out_dir) {
  return guarded([&] {
    const auto cfg = mcsforge::parse_experiment_config(or_empty(config_json),
                                                       use_tuned_defaults != 0);
    mcsforge::cmd_train_aht(cfg, or_empty(teammates_spec),
                            mcsforge::resolve_out_root(or_empty(out_dir), cfg.out_dir));
  });
}

int mcsf_run_eval(const char* config_json, int use_tuned_defaults,
                  const char* agent_path, const char* out_dir) {
  return guarded([&] {
    const auto cfg = mcsforge::parse_experiment_config(or_empty(config_json),
                                                       use_tuned_defaults != 0);
    if (!agent_path) throw mcsforge::ConfigError("agent checkpoint path is required");
    mcsforge::cmd_eval(cfg, agent_path,
                       mcsforge::resolve_out_root(or_empty(out_dir), cfg.out_dir));
  });
}

int mcsf_run_analyze(const char* checkpoint_path, int episodes, uint64_t seed,
                     const char* out_dir) {
  return guarded([&] {
    if (!checkpoint_path) throw mcsforge::ConfigError("checkpoint path is required");
    mcsforge::cmd_analyze(checkpoint_path, episodes > 0 ? episodes : 1000, seed,
                          mcsforge::resolve_out_root(or_empty(out_dir), ""));
  });
}

int mcsf_run_plot(const char* csv_path, const char* svg_out_path) {
  return guarded([&] {
    if (!csv_path || !svg_out_path)
      throw mcsforge::ConfigError("input CSV and output SVG paths are required");
    mcsforge::cmd_plot(csv_path, svg_out_path);
  });
}

}  // extern "C"
