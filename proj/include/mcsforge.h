/* C API for the mcsforge teammate-generation library.
 *
 * All functions return a status code; details for the most recent failure
 * on the calling thread are available via mcsf_last_error(). Opaque handles
 * must be released with their matching destroy function.
 */
#ifndef MCSFORGE_H
#define MCSFORGE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* status codes; the CLI uses them directly as exit codes */
enum {
  MCSF_OK = 0,
  MCSF_ERR_RUNTIME = 1,
  MCSF_ERR_CONFIG = 2,
  MCSF_ERR_DIVERGENCE = 3,
  MCSF_ERR_IO = 4
};

/* thread-local message for the last failed call; never NULL */
const char* mcsf_last_error(void);

const char* mcsf_version(void);

/* ---- environments ---- */

typedef struct mcsf_env mcsf_env;

/* env_id: "matrix", "coop_reach", "weighted_coop_reach", "lbf".
 * grid_dim/horizon/num_items <= 0 select the per-environment defaults. */
mcsf_env* mcsf_env_create(const char* env_id, int grid_dim, int horizon, int num_items);
void mcsf_env_destroy(mcsf_env* env);

int mcsf_env_obs_size(const mcsf_env* env);
int mcsf_env_num_actions(const mcsf_env* env);

/* obs buffers must hold obs_size doubles each */
int mcsf_env_reset(mcsf_env* env, uint64_t seed, double* obs_a, double* obs_b);
int mcsf_env_step(mcsf_env* env, int action_a, int action_b, double* obs_a,
                  double* obs_b, double* reward, int* done);

/* ---- analytic diversity objectives ---- */

/* matrix: k*k row-major cross-play returns, rows = AHT-side policy */
int mcsf_brdiv_objective(const double* matrix, int k, double alpha, double* out);
int mcsf_lipo_objective(const double* matrix, int k, double alpha, double* out);
/* alpha1/alpha2: k*k row-major multipliers, diagonals ignored */
int mcsf_lagrange_dual(const double* matrix, int k, double tau, const double* alpha1,
                       const double* alpha2, double* out);
int mcsf_pair_weight(int k, double tau, const double* alpha1, const double* alpha2,
                     int i, int j, double* out);

/* ---- orchestration (JSON experiment configs, see docs) ---- */

/* out_dir may be NULL/empty: falls back to the config, then $MCSFORGE_OUT */
int mcsf_run_generate(const char* config_json, int use_tuned_defaults,
                      const char* out_dir);
int mcsf_run_rerun(const char* manifest_path, const char* out_dir);
int mcsf_run_xp_matrix(const char* checkpoint_path, int episodes, uint64_t seed,
                       const char* out_dir);
int mcsf_run_mcs(const char* env_id, int episodes_per_cell, const char* out_dir);
/* teammates_spec: "heuristics:1,2,3" or "population:<checkpoint path>" */
int mcsf_run_train_aht(const char* config_json, int use_tuned_defaults,
                       const char* teammates_spec, const char* out_dir);
int mcsf_run_eval(const char* config_json, int use_tuned_defaults,
                  const char* agent_path, const char* out_dir);
int mcsf_run_analyze(const char* checkpoint_path, int episodes, uint64_t seed,
                     const char* out_dir);
int mcsf_run_plot(const char* csv_path, const char* svg_out_path);

#ifdef __cplusplus
}
#endif

#endif /* MCSFORGE_H */
