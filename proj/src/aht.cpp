#include "mcsforge/aht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mcsforge {

namespace {

class HeuristicPartner : public Teammate {
 public:
  HeuristicPartner(EnvId id, int heuristic_id, uint64_t seed)
      : policy_(id, heuristic_id, seed) {}
  void begin_episode(const EnvInstance& env) override { policy_.begin_episode(env, 1); }
  int act(const EnvInstance& env, std::span<const double>) override {
    return policy_.act(env, 1);
  }

 private:
  HeuristicTeammate policy_;
};

class PolicyPartner : public Teammate {
 public:
  PolicyPartner(Mlp policy, Rng rng) : policy_(std::move(policy)), rng_(rng) {}
  void begin_episode(const EnvInstance&) override {}
  int act(const EnvInstance&, std::span<const double> obs) override {
    return sample_action(policy_, obs, rng_, nullptr);
  }

 private:
  Mlp policy_;
  Rng rng_;
};

}  // namespace

TeammateSet heuristic_teammates(EnvId id, const std::vector<int>& heuristic_ids,
                                uint64_t seed) {
  TeammateSet out;
  for (size_t k = 0; k < heuristic_ids.size(); ++k)
    out.push_back(std::make_unique<HeuristicPartner>(id, heuristic_ids[k], seed + k));
  return out;
}

TeammateSet population_teammates(const Population& pop, uint64_t seed) {
  TeammateSet out;
  Rng rng(seed);
  for (int k = 0; k < pop.K; ++k)
    out.push_back(std::make_unique<PolicyPartner>(pop.teammate[k], rng.split(k + 1)));
  return out;
}

AhtAgent AhtAgent::create(const EnvConfig& env, const AhtSchedule& sched, Rng& rng) {
  EnvInstance probe(env);
  AhtAgent agent;
  agent.obs_dim = probe.obs_size();
  agent.num_actions = probe.num_actions();
  agent.meta_episodes = sched.meta_episodes;
  std::vector<int> trunk_dims{agent.input_dim()};
  trunk_dims.insert(trunk_dims.end(), sched.trunk_hidden.begin(), sched.trunk_hidden.end());
  if (trunk_dims.size() < 2) trunk_dims.push_back(agent.input_dim());
  agent.trunk = Mlp::create(trunk_dims, Head::Scalar, rng);
  agent.cell = LstmCell::create(trunk_dims.back(), sched.lstm_hidden, rng);
  agent.policy_head =
      Mlp::create({sched.lstm_hidden, agent.num_actions}, Head::SoftmaxLogits, rng);
  agent.value_head = Mlp::create({sched.lstm_hidden, 1}, Head::Scalar, rng);
  return agent;
}

std::vector<double> AhtAgent::step_input(std::span<const double> obs, int prev_action,
                                         double prev_reward, bool episode_start) const {
  std::vector<double> in;
  in.reserve(input_dim());
  in.insert(in.end(), obs.begin(), obs.end());
  for (int a = 0; a < num_actions; ++a) in.push_back(a == prev_action ? 1.0 : 0.0);
  in.push_back(prev_reward);
  in.push_back(episode_start ? 1.0 : 0.0);
  return in;
}

Checkpoint AhtAgent::to_checkpoint() const {
  Checkpoint cp;
  cp.meta["kind"] = "aht_agent";
  cp.meta["obs_dim"] = std::to_string(obs_dim);
  cp.meta["num_actions"] = std::to_string(num_actions);
  cp.meta["meta_episodes"] = std::to_string(meta_episodes);
  cp.meta["lstm_input"] = std::to_string(cell.input_dim);
  cp.meta["lstm_hidden"] = std::to_string(cell.hidden_dim);
  mlp_to_checkpoint(trunk, "trunk", cp);
  mlp_to_checkpoint(policy_head, "policy_head", cp);
  mlp_to_checkpoint(value_head, "value_head", cp);
  cp.add("cell.wx", {4 * cell.hidden_dim, cell.input_dim}, cell.params[0]);
  cp.add("cell.wh", {4 * cell.hidden_dim, cell.hidden_dim}, cell.params[1]);
  cp.add("cell.b", {4 * cell.hidden_dim}, cell.params[2]);
  return cp;
}

AhtAgent AhtAgent::from_checkpoint(const Checkpoint& cp) {
  if (cp.meta.count("kind") == 0 || cp.meta.at("kind") != "aht_agent")
    throw IoError("checkpoint does not contain an adaptive agent");
  AhtAgent agent;
  agent.obs_dim = std::stoi(cp.meta.at("obs_dim"));
  agent.num_actions = std::stoi(cp.meta.at("num_actions"));
  agent.meta_episodes = std::stoi(cp.meta.at("meta_episodes"));
  agent.trunk = mlp_from_checkpoint(cp, "trunk");
  agent.policy_head = mlp_from_checkpoint(cp, "policy_head");
  agent.value_head = mlp_from_checkpoint(cp, "value_head");
  agent.cell.input_dim = std::stoi(cp.meta.at("lstm_input"));
  agent.cell.hidden_dim = std::stoi(cp.meta.at("lstm_hidden"));
  agent.cell.params = {cp.find("cell.wx").data, cp.find("cell.wh").data,
                       cp.find("cell.b").data};
  return agent;
}

MetaTrajectory meta_rollout(const AhtAgent& agent, Teammate& teammate, EnvInstance& env,
                            int meta_episodes, Rng& rng, int teammate_index) {
  MetaTrajectory traj;
  traj.teammate_index = teammate_index;
  LstmState state = lstm_zero_state(agent.cell);
  int prev_action = -1;
  double prev_reward = 0.0;
  for (int ep = 0; ep < meta_episodes; ++ep) {
    double h_norm = 0.0;
    for (double v : state.h) h_norm += v * v;
    traj.start_hidden_norms.push_back(std::sqrt(h_norm));
    auto obs = env.reset(rng.next_u64());
    teammate.begin_episode(env);
    double ep_return = 0.0;
    bool first = true;
    while (!env.done()) {
      AhtStep step;
      step.input = agent.step_input(obs.obs_a, prev_action, prev_reward, first);
      first = false;
      const auto enc = mlp_forward(agent.trunk, step.input);
      const auto h = lstm_step(agent.cell, enc, state);
      const auto probs = mlp_forward(agent.policy_head, h);
      step.value = mlp_forward(agent.value_head, h)[0];
      step.action = rng.categorical(probs);
      step.logp_old = log_prob(probs, step.action);
      const int partner = teammate.act(env, obs.obs_b);
      auto res = env.step(step.action, partner);
      step.reward = res.reward;
      step.episode_end = res.done;
      ep_return += res.reward;
      prev_action = step.action;
      prev_reward = res.reward;
      obs = std::move(res.obs);
      traj.steps.push_back(std::move(step));
    }
    traj.episode_returns.push_back(ep_return);
  }
  return traj;
}

AhtGrads AhtGrads::zeros_like(const AhtAgent& agent) {
  return {zero_grads_like(agent.trunk.params), zero_grads_like(agent.cell.params),
          zero_grads_like(agent.policy_head.params),
          zero_grads_like(agent.value_head.params)};
}

double aht_sequence_backward(const AhtAgent& agent, const std::vector<AhtStep>& steps,
                             const std::vector<double>& advantages,
                             const std::vector<double>& value_targets, double clip_ratio,
                             double ent_coef, double value_coef, AhtGrads& grads) {
  const size_t T = steps.size();
  if (advantages.size() != T || value_targets.size() != T)
    throw std::invalid_argument("advantage/target length mismatch");
  if (T == 0) return 0.0;
  const double inv_t = 1.0 / static_cast<double>(T);
  const double lo = 1.0 - clip_ratio;
  const double hi = 1.0 + clip_ratio;

  // fresh forward pass under the current parameters
  std::vector<MlpTape> trunk_tapes(T);
  std::vector<LstmStepTape> cell_tapes(T);
  std::vector<MlpTape> pi_tapes(T), v_tapes(T);
  LstmState state = lstm_zero_state(agent.cell);
  double loss = 0.0;
  std::vector<std::vector<double>> dh(T);
  for (size_t t = 0; t < T; ++t) {
    const auto enc = mlp_forward(agent.trunk, steps[t].input, &trunk_tapes[t]);
    const auto h = lstm_step(agent.cell, enc, state, &cell_tapes[t]);
    const auto probs = mlp_forward(agent.policy_head, h, &pi_tapes[t]);
    const double v = mlp_forward(agent.value_head, h, &v_tapes[t])[0];

    const double p_old = std::exp(steps[t].logp_old);
    const double ratio = probs[steps[t].action] / p_old;
    const double surr1 = ratio * advantages[t];
    const double surr2 = std::clamp(ratio, lo, hi) * advantages[t];
    const double verr = v - value_targets[t];
    double ent_term = 0.0;
    for (double p : probs)
      if (p > 0.0) ent_term += p * std::log(p);
    loss += (-std::min(surr1, surr2) + value_coef * verr * verr + ent_coef * ent_term) * inv_t;

    // per-step upstream into the hidden state, via both heads
    std::vector<double> dprobs(probs.size(), 0.0);
    const bool unclipped = surr1 <= surr2 || (ratio > lo && ratio < hi);
    if (unclipped) dprobs[steps[t].action] += -advantages[t] / p_old * inv_t;
    if (ent_coef != 0.0)
      for (size_t a = 0; a < probs.size(); ++a)
        dprobs[a] += ent_coef * (std::log(std::max(probs[a], 1e-300)) + 1.0) * inv_t;
    dh[t] = mlp_backward(agent.policy_head, pi_tapes[t], dprobs, grads.policy_head);
    const double dv = 2.0 * value_coef * verr * inv_t;
    const auto dh_v =
        mlp_backward(agent.value_head, v_tapes[t], std::span<const double>(&dv, 1),
                     grads.value_head);
    for (size_t k = 0; k < dh[t].size(); ++k) dh[t][k] += dh_v[k];
  }

  std::vector<std::vector<double>> dx;
  lstm_backward(agent.cell, cell_tapes, dh, grads.cell, &dx);
  for (size_t t = 0; t < T; ++t)
    mlp_backward(agent.trunk, trunk_tapes[t], dx[t], grads.trunk);
  return loss;
}

namespace {

void scale_grads(Tensors& g, double s) {
  for (auto& t : g)
    for (double& v : t) v *= s;
}

}  // namespace

AhtAgent train_aht(const EnvConfig& env, const TeammateSet& pi_train,
                   const AhtSchedule& sched, uint64_t seed,
                   std::vector<AhtMetricsRow>* metrics_out) {
  if (pi_train.empty()) throw std::invalid_argument("training teammate set is empty");
  Rng rng(seed);
  AhtAgent agent = AhtAgent::create(env, sched, rng);
  AdamState opt_trunk = AdamState::create(sched.lr, agent.trunk.params);
  AdamState opt_cell = AdamState::create(sched.lr, agent.cell.params);
  AdamState opt_pi = AdamState::create(sched.lr, agent.policy_head.params);
  AdamState opt_v = AdamState::create(sched.lr, agent.value_head.params);
  EnvInstance rollout_env(env);
  int64_t steps_done = 0;

  while (steps_done < sched.total_steps) {
    std::vector<MetaTrajectory> batch;
    for (int b = 0; b < sched.meta_batch; ++b) {
      const int k = rng.uniform_int(static_cast<int>(pi_train.size()));
      batch.push_back(meta_rollout(agent, *pi_train[k], rollout_env, sched.meta_episodes,
                                   rng, k));
      steps_done += static_cast<int64_t>(batch.back().steps.size());
    }

    // per-episode discounted returns-to-go as value targets
    std::vector<std::vector<double>> targets(batch.size()), advs(batch.size());
    double adv_sum = 0.0, adv_sq = 0.0;
    size_t n_total = 0;
    for (size_t b = 0; b < batch.size(); ++b) {
      const auto& steps = batch[b].steps;
      targets[b].assign(steps.size(), 0.0);
      advs[b].assign(steps.size(), 0.0);
      double g = 0.0;
      for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        if (steps[t].episode_end) g = 0.0;
        g = steps[t].reward + sched.gamma * g;
        targets[b][t] = g;
        advs[b][t] = g - steps[t].value;
        adv_sum += advs[b][t];
        adv_sq += advs[b][t] * advs[b][t];
        ++n_total;
      }
    }
    const double adv_mean = adv_sum / static_cast<double>(n_total);
    const double adv_std =
        std::sqrt(std::max(0.0, adv_sq / static_cast<double>(n_total) - adv_mean * adv_mean));
    for (auto& a : advs)
      for (double& v : a) v = (v - adv_mean) / (adv_std + 1e-8);

    double last_loss = 0.0;
    for (int epoch = 0; epoch < sched.ppo_epochs; ++epoch) {
      AhtGrads grads = AhtGrads::zeros_like(agent);
      double loss = 0.0;
      for (size_t b = 0; b < batch.size(); ++b)
        loss += aht_sequence_backward(agent, batch[b].steps, advs[b], targets[b],
                                      sched.clip_ratio, sched.w_ent, sched.value_coef,
                                      grads);
      loss /= static_cast<double>(batch.size());
      if (!std::isfinite(loss)) throw DivergenceError("non-finite adaptive-agent loss");
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      scale_grads(grads.trunk, inv_b);
      scale_grads(grads.cell, inv_b);
      scale_grads(grads.policy_head, inv_b);
      scale_grads(grads.value_head, inv_b);
      opt_trunk.apply(agent.trunk.params, grads.trunk);
      opt_cell.apply(agent.cell.params, grads.cell);
      opt_pi.apply(agent.policy_head.params, grads.policy_head);
      opt_v.apply(agent.value_head.params, grads.value_head);
      last_loss = loss;
    }

    if (metrics_out) {
      AhtMetricsRow row;
      row.step = steps_done;
      row.loss = last_loss;
      double ret_sum = 0.0;
      size_t ret_n = 0;
      row.return_by_episode.assign(sched.meta_episodes, 0.0);
      for (const auto& traj : batch) {
        for (size_t e = 0; e < traj.episode_returns.size(); ++e) {
          ret_sum += traj.episode_returns[e];
          ++ret_n;
          if (e < row.return_by_episode.size())
            row.return_by_episode[e] += traj.episode_returns[e] / batch.size();
        }
        for (const auto& s : traj.steps) row.entropy += -s.logp_old / traj.steps.size();
      }
      row.mean_return = ret_sum / static_cast<double>(ret_n);
      row.entropy /= static_cast<double>(batch.size());
      metrics_out->push_back(std::move(row));
    }
  }
  return agent;
}

std::string RobustnessReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "heuristic_id,mean_return,stderr,n\n";
  for (size_t k = 0; k < heuristic_ids.size(); ++k)
    os << heuristic_ids[k] << "," << mean_return[k] << "," << std_error[k] << ","
       << meta_episodes_per_teammate << "\n";
  return os.str();
}

RobustnessReport evaluate_robustness(const AhtAgent& agent, const EnvConfig& env,
                                     const std::vector<int>& heuristic_ids,
                                     int meta_episodes_per_teammate, uint64_t seed) {
  RobustnessReport rep;
  rep.heuristic_ids = heuristic_ids;
  rep.meta_episodes_per_teammate = meta_episodes_per_teammate;
  rep.meta_episodes = agent.meta_episodes;
  EnvInstance e(env);
  for (size_t k = 0; k < heuristic_ids.size(); ++k) {
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> by_ep(agent.meta_episodes, 0.0);
    for (int m = 0; m < meta_episodes_per_teammate; ++m) {
      Rng rng(seed + 1000003 * k + m);
      HeuristicPartner partner(env.id, heuristic_ids[k], rng.next_u64());
      const auto traj =
          meta_rollout(agent, partner, e, agent.meta_episodes, rng, static_cast<int>(k));
      double mean_ep = 0.0;
      for (size_t ep = 0; ep < traj.episode_returns.size(); ++ep) {
        mean_ep += traj.episode_returns[ep] / traj.episode_returns.size();
        by_ep[ep] += traj.episode_returns[ep] / meta_episodes_per_teammate;
      }
      sum += mean_ep;
      sumsq += mean_ep * mean_ep;
    }
    const double mean = sum / meta_episodes_per_teammate;
    rep.mean_return.push_back(mean);
    double se = 0.0;
    if (meta_episodes_per_teammate > 1) {
      const double var = std::max(
          0.0, (sumsq - meta_episodes_per_teammate * mean * mean) /
                   (meta_episodes_per_teammate - 1));
      se = std::sqrt(var / meta_episodes_per_teammate);
    }
    rep.std_error.push_back(se);
    rep.by_episode_index.push_back(std::move(by_ep));
  }
  rep.overall_mean =
      std::accumulate(rep.mean_return.begin(), rep.mean_return.end(), 0.0) /
      static_cast<double>(rep.mean_return.size());
  return rep;
}

std::vector<double> oracle_best_response_returns(const EnvConfig& env,
                                                 const std::vector<int>& heuristic_ids,
                                                 const std::vector<int>& candidate_ids,
                                                 int episodes, uint64_t seed) {
  std::vector<double> out;
  for (size_t k = 0; k < heuristic_ids.size(); ++k) {
    double best = -std::numeric_limits<double>::infinity();
    for (int cand : candidate_ids) {
      double total = 0.0;
      Rng rng(seed + 7919 * k);  // shared start seeds across candidates
      for (int ep = 0; ep < episodes; ++ep) {
        EnvInstance e(env);
        e.reset(rng.next_u64());
        HeuristicTeammate pa(env.id, cand, rng.next_u64());
        HeuristicTeammate pb(env.id, heuristic_ids[k], rng.next_u64());
        pa.begin_episode(e, 0);
        pb.begin_episode(e, 1);
        while (!e.done()) total += e.step(pa.act(e, 0), pb.act(e, 1)).reward;
      }
      best = std::max(best, total / episodes);
    }
    out.push_back(best);
  }
  return out;
}

double t_confidence_halfwidth(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return 0.0;
  // two-sided 95% t quantiles for df = 1..10, then the large-sample value
  static const double kT[] = {12.706, 4.303, 3.182, 2.776, 2.571,
                              2.447,  2.365, 2.306, 2.262, 2.228};
  const double t = n - 1 <= 10 ? kT[n - 2] : 1.96;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  return t * se;
}

}  // namespace mcsforge
