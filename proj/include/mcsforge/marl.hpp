#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcsforge/checkpoint.hpp"
#include "mcsforge/diversity.hpp"
#include "mcsforge/env.hpp"
#include "mcsforge/mlp.hpp"
#include "mcsforge/optim.hpp"

namespace mcsforge {

// Raised when value estimates blow past any achievable return; mapped to
// exit code 3 by the CLI.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainSchedule {
  int64_t total_steps = 200000;  // T
  int n_threads = 8;             // parallel rollout workers
  int t_update = 2;              // env steps per worker between updates
  int t_lagrange = 10;           // policy updates between multiplier updates
  double clip_ratio = 0.2;
  int ppo_epochs = 4;
  int minibatches = 4;
  double w_ent = 1e-3;
  double gamma = 0.99;
  double lr_pi = 1e-3;
  double lr_v = 1e-3;
  double lr_alpha = 0.05;
  int target_sync_period = 200;  // critic updates between target hard copies
  std::vector<int> policy_hidden = {32, 32};
  std::vector<int> critic_hidden = {32, 32};
};

// K AHT-side policies, K teammate policies, and one pair-conditioned
// critic (observations of both seats + one-hot (j, i) pair encoding).
struct Population {
  int K = 0;
  std::vector<Mlp> aht;       // seat 0
  std::vector<Mlp> teammate;  // seat 1
  Mlp critic;
  Mlp target_critic;

  static Population create(const EnvConfig& env, int K, const TrainSchedule& sched, Rng& rng);

  std::vector<double> critic_input(std::span<const double> obs_a,
                                   std::span<const double> obs_b, int j, int i) const;

  Checkpoint to_checkpoint() const;
  static Population from_checkpoint(const Checkpoint& cp);
};

void mlp_to_checkpoint(const Mlp& net, const std::string& prefix, Checkpoint& cp);
Mlp mlp_from_checkpoint(const Checkpoint& cp, const std::string& prefix);

struct Transition {
  std::vector<double> obs_a, obs_b;
  std::vector<double> next_obs_a, next_obs_b;
  int a_a = 0, a_b = 0;
  double logp_a = 0.0, logp_b = 0.0;
  double reward = 0.0;
  bool done = false;
  bool episode_start = false;
};

struct RolloutBatch {
  int pair_i = 0;  // teammate index
  int pair_j = 0;  // AHT-side index
  std::vector<Transition> transitions;
  double mean_entropy = 0.0;  // of the acting policies at collection time
};

// uniform over all K^2 ordered pairs, (teammate i, aht-side j)
std::pair<int, int> sample_pair(int K, Rng& rng);

int sample_action(const Mlp& policy, std::span<const double> obs, Rng& rng, double* logp);

// ---- reusable update primitives ----

struct CriticSample {
  std::vector<double> input;       // critic input at t
  std::vector<double> next_input;  // critic input at t+1
  double reward = 0.0;
  bool done = false;
};

// one pass of TD(0) regression against the target network; returns the
// mean squared TD error before the step
double critic_td_update(Mlp& critic, const Mlp& target, std::span<const CriticSample> batch,
                        double gamma, AdamState& opt);

struct PolicySample {
  std::vector<double> obs;
  int action = 0;
  double logp_old = 0.0;
  double advantage = 0.0;  // already weighted
};

// clipped-surrogate update with entropy bonus
void ppo_update_policy(Mlp& policy, std::span<const PolicySample> samples,
                       const TrainSchedule& sched, double ent_coef, AdamState& opt, Rng& rng);

// ---- full training loop ----

enum class WeightMode { Lagrangian, BRDiv, LIPO };

struct MetricsRow {
  int64_t step = 0;
  int pair_i = 0, pair_j = 0;
  double sp_return = 0.0;
  double xp_return_mean = 0.0;
  std::vector<double> alpha1;  // row-major off-diagonal order (i,j), i != j
  std::vector<double> alpha2;
  double slack_min = 0.0;
  double entropy = 0.0;
};

std::string metrics_header(int K);
std::string metrics_row_csv(const MetricsRow& row);

class Trainer {
 public:
  Trainer(const EnvConfig& env, const TrainSchedule& sched, int K, double tau,
          uint64_t seed, WeightMode mode = WeightMode::Lagrangian, double alpha = 1.0);

  // one collection wave for the pair: t_update steps on each worker
  RolloutBatch collect(int i, int j);
  double update_critic(const RolloutBatch& batch);
  void update_policies(const RolloutBatch& batch);
  void update_multipliers();

  // the full loop; metrics_out receives one row per multiplier-update
  // cadence (also emitted for fixed-weight baselines)
  void run(std::vector<MetricsRow>* metrics_out = nullptr);

  Population& population() { return pop_; }
  const Population& population() const { return pop_; }
  LagrangeSet& multipliers() { return lagrange_; }
  const LagrangeSet& multipliers() const { return lagrange_; }
  ReturnMatrix estimate_return_matrix();  // critic-based, at episode starts
  double weight(int i, int j) const;

  int64_t steps_done() const { return steps_done_; }
  int64_t cross_eval_count() const { return cross_evals_; }
  int critic_updates() const { return critic_updates_; }

 private:
  struct Worker {
    std::unique_ptr<EnvInstance> env;
    JointObservation obs;
    bool fresh = true;
    Rng rng;
    Worker(const EnvConfig& cfg, Rng r) : env(std::make_unique<EnvInstance>(cfg)), rng(r) {}
  };

  std::vector<Worker>& workers_for(int i, int j);
  void check_divergence(const ReturnMatrix& R_hat) const;

  EnvConfig env_cfg_;
  TrainSchedule sched_;
  WeightMode mode_;
  double alpha_ = 1.0;
  Rng rng_;
  Population pop_;
  LagrangeSet lagrange_;
  std::vector<AdamState> opt_aht_, opt_teammate_;
  AdamState opt_critic_;
  std::vector<std::vector<Worker>> pair_workers_;  // K*K slots, lazily filled
  std::vector<std::vector<double>> start_obs_;     // recent episode-start critic contexts
  int64_t steps_done_ = 0;
  int64_t cross_evals_ = 0;
  int critic_updates_ = 0;
  int policy_updates_ = 0;
};

// per-policy behavior profile: empirical action frequencies for the matrix
// game, corner-arrival frequencies for reaching, ordering stats for LBF
std::vector<std::vector<double>> behavior_profile(const Population& pop, const EnvConfig& env,
                                                  int episodes, uint64_t seed, bool teammates);

// Monte-Carlo cross-play return matrix from a trained population,
// optionally with per-cell standard errors
ReturnMatrix measure_return_matrix(const Population& pop, const EnvConfig& env, int episodes,
                                   uint64_t seed, ReturnMatrix* stderr_out = nullptr);

}  // namespace mcsforge
