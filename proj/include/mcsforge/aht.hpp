#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mcsforge/env.hpp"
#include "mcsforge/heuristics.hpp"
#include "mcsforge/lstm.hpp"
#include "mcsforge/marl.hpp"

namespace mcsforge {

// A fixed partner occupying seat 1 for a whole meta-episode.
class Teammate {
 public:
  virtual ~Teammate() = default;
  virtual void begin_episode(const EnvInstance& env) = 0;
  virtual int act(const EnvInstance& env, std::span<const double> obs) = 0;
};

using TeammateSet = std::vector<std::unique_ptr<Teammate>>;

TeammateSet heuristic_teammates(EnvId id, const std::vector<int>& heuristic_ids,
                                uint64_t seed);
TeammateSet population_teammates(const Population& pop, uint64_t seed);

struct AhtSchedule {
  int64_t total_steps = 1000000;
  int meta_episodes = 5;  // episodes per sampled teammate (M)
  int meta_batch = 8;     // meta-episodes collected per update
  double gamma = 0.99;
  double lr = 1e-4;
  double clip_ratio = 0.2;
  int ppo_epochs = 4;
  double w_ent = 1e-3;
  double value_coef = 0.5;
  std::vector<int> trunk_hidden = {32};
  int lstm_hidden = 16;  // L_rep
};

// Recurrent meta-learner: per-step input is (observation, previous own
// action one-hot, previous reward, episode-boundary flag); the hidden
// state persists across episode boundaries within a meta-episode.
struct AhtAgent {
  int obs_dim = 0;
  int num_actions = 0;
  int meta_episodes = 5;
  Mlp trunk;  // linear/tanh encoder feeding the recurrent cell
  LstmCell cell;
  Mlp policy_head;
  Mlp value_head;

  int input_dim() const { return obs_dim + num_actions + 2; }

  static AhtAgent create(const EnvConfig& env, const AhtSchedule& sched, Rng& rng);

  std::vector<double> step_input(std::span<const double> obs, int prev_action,
                                 double prev_reward, bool episode_start) const;

  Checkpoint to_checkpoint() const;
  static AhtAgent from_checkpoint(const Checkpoint& cp);
};

struct AhtStep {
  std::vector<double> input;
  int action = 0;
  double logp_old = 0.0;
  double reward = 0.0;
  bool episode_end = false;
  double value = 0.0;  // baseline at collection time
};

struct MetaTrajectory {
  int teammate_index = 0;
  std::vector<AhtStep> steps;
  std::vector<double> episode_returns;      // one per episode in the meta-episode
  std::vector<double> start_hidden_norms;   // ||h|| entering each episode
};

MetaTrajectory meta_rollout(const AhtAgent& agent, Teammate& teammate, EnvInstance& env,
                            int meta_episodes, Rng& rng, int teammate_index = 0);

struct AhtGrads {
  Tensors trunk, cell, policy_head, value_head;
  static AhtGrads zeros_like(const AhtAgent& agent);
};

// Clipped-surrogate + value regression + entropy loss over one recorded
// sequence; recomputes the forward pass under the current parameters and
// accumulates gradients. Returns the (per-step mean) scalar loss.
double aht_sequence_backward(const AhtAgent& agent, const std::vector<AhtStep>& steps,
                             const std::vector<double>& advantages,
                             const std::vector<double>& value_targets, double clip_ratio,
                             double ent_coef, double value_coef, AhtGrads& grads);

struct AhtMetricsRow {
  int64_t step = 0;
  double mean_return = 0.0;                // mean episodic return in the batch
  std::vector<double> return_by_episode;   // identification curve within meta-episodes
  double entropy = 0.0;
  double loss = 0.0;
};

AhtAgent train_aht(const EnvConfig& env, const TeammateSet& pi_train,
                   const AhtSchedule& sched, uint64_t seed,
                   std::vector<AhtMetricsRow>* metrics_out = nullptr);

struct RobustnessReport {
  std::vector<int> heuristic_ids;
  std::vector<double> mean_return;  // episodic, averaged over the meta-episode
  std::vector<double> std_error;
  std::vector<std::vector<double>> by_episode_index;  // [teammate][episode idx]
  int meta_episodes_per_teammate = 0;
  int meta_episodes = 0;  // M used during evaluation
  double overall_mean = 0.0;

  std::string to_csv() const;
};

// Pure function of (agent parameters, suite, seed): teammates are sampled
// per meta-episode and fixed within it.
RobustnessReport evaluate_robustness(const AhtAgent& agent, const EnvConfig& env,
                                     const std::vector<int>& heuristic_ids,
                                     int meta_episodes_per_teammate, uint64_t seed);

// Best scripted response per heuristic from a candidate universe (a cheating
// upper bound for the robustness score). Mean episodic returns.
std::vector<double> oracle_best_response_returns(const EnvConfig& env,
                                                 const std::vector<int>& heuristic_ids,
                                                 const std::vector<int>& candidate_ids,
                                                 int episodes, uint64_t seed);

// two-sided 95% confidence half-width across seeds (t-distribution)
double t_confidence_halfwidth(const std::vector<double>& values);

}  // namespace mcsforge
