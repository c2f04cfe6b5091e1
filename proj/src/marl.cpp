#include "mcsforge/marl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace mcsforge {

namespace {

std::vector<int> policy_dims(int obs, int actions, const std::vector<int>& hidden) {
  std::vector<int> dims{obs};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(actions);
  return dims;
}

}  // namespace

void mlp_to_checkpoint(const Mlp& net, const std::string& prefix, Checkpoint& cp) {
  std::ostringstream dims;
  for (size_t k = 0; k < net.layer_dims.size(); ++k)
    dims << (k ? "," : "") << net.layer_dims[k];
  cp.meta[prefix + ".dims"] = dims.str();
  cp.meta[prefix + ".head"] = net.head == Head::SoftmaxLogits ? "softmax" : "scalar";
  for (int l = 0; l < net.num_layers(); ++l) {
    cp.add(prefix + ".w" + std::to_string(l),
           {net.layer_dims[l + 1], net.layer_dims[l]}, net.weight(l));
    cp.add(prefix + ".b" + std::to_string(l), {net.layer_dims[l + 1]}, net.bias(l));
  }
}

Mlp mlp_from_checkpoint(const Checkpoint& cp, const std::string& prefix) {
  Mlp net;
  std::istringstream dims(cp.meta.at(prefix + ".dims"));
  std::string tok;
  while (std::getline(dims, tok, ',')) net.layer_dims.push_back(std::stoi(tok));
  net.head = cp.meta.at(prefix + ".head") == "softmax" ? Head::SoftmaxLogits : Head::Scalar;
  for (int l = 0; l + 1 < static_cast<int>(net.layer_dims.size()); ++l) {
    net.params.push_back(cp.find(prefix + ".w" + std::to_string(l)).data);
    net.params.push_back(cp.find(prefix + ".b" + std::to_string(l)).data);
  }
  return net;
}

Population Population::create(const EnvConfig& env, int K, const TrainSchedule& sched,
                              Rng& rng) {
  EnvInstance probe(env);
  const int obs = probe.obs_size();
  const int actions = probe.num_actions();
  Population pop;
  pop.K = K;
  for (int k = 0; k < K; ++k) {
    pop.aht.push_back(Mlp::create(policy_dims(obs, actions, sched.policy_hidden),
                                  Head::SoftmaxLogits, rng));
    pop.teammate.push_back(Mlp::create(policy_dims(obs, actions, sched.policy_hidden),
                                       Head::SoftmaxLogits, rng));
  }
  pop.critic = Mlp::create(policy_dims(2 * obs + 2 * K, 1, sched.critic_hidden),
                           Head::Scalar, rng);
  pop.target_critic = pop.critic;
  return pop;
}

std::vector<double> Population::critic_input(std::span<const double> obs_a,
                                             std::span<const double> obs_b, int j,
                                             int i) const {
  std::vector<double> in;
  in.reserve(obs_a.size() + obs_b.size() + 2 * K);
  in.insert(in.end(), obs_a.begin(), obs_a.end());
  in.insert(in.end(), obs_b.begin(), obs_b.end());
  for (int k = 0; k < K; ++k) in.push_back(k == j ? 1.0 : 0.0);
  for (int k = 0; k < K; ++k) in.push_back(k == i ? 1.0 : 0.0);
  return in;
}

Checkpoint Population::to_checkpoint() const {
  Checkpoint cp;
  cp.meta["kind"] = "population";
  cp.meta["K"] = std::to_string(K);
  for (int k = 0; k < K; ++k) {
    mlp_to_checkpoint(aht[k], "aht." + std::to_string(k), cp);
    mlp_to_checkpoint(teammate[k], "teammate." + std::to_string(k), cp);
  }
  mlp_to_checkpoint(critic, "critic", cp);
  mlp_to_checkpoint(target_critic, "target_critic", cp);
  return cp;
}

Population Population::from_checkpoint(const Checkpoint& cp) {
  if (cp.meta.count("kind") == 0 || cp.meta.at("kind") != "population")
    throw IoError("checkpoint does not contain a population");
  Population pop;
  pop.K = std::stoi(cp.meta.at("K"));
  for (int k = 0; k < pop.K; ++k) {
    pop.aht.push_back(mlp_from_checkpoint(cp, "aht." + std::to_string(k)));
    pop.teammate.push_back(mlp_from_checkpoint(cp, "teammate." + std::to_string(k)));
  }
  pop.critic = mlp_from_checkpoint(cp, "critic");
  pop.target_critic = mlp_from_checkpoint(cp, "target_critic");
  return pop;
}

std::pair<int, int> sample_pair(int K, Rng& rng) {
  if (K < 1) throw std::invalid_argument("K must be positive");
  const int i = rng.uniform_int(K);
  const int j = rng.uniform_int(K);
  return {i, j};
}

int sample_action(const Mlp& policy, std::span<const double> obs, Rng& rng, double* logp) {
  const auto probs = mlp_forward(policy, obs);
  const int a = rng.categorical(probs);
  if (logp) *logp = log_prob(probs, a);
  return a;
}

double critic_td_update(Mlp& critic, const Mlp& target, std::span<const CriticSample> batch,
                        double gamma, AdamState& opt) {
  if (batch.empty()) return 0.0;
  Tensors grads = zero_grads_like(critic.params);
  MlpTape tape;
  double total_loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    double boot = 0.0;
    if (!s.done) boot = mlp_forward(target, s.next_input)[0];
    const double td_target = s.reward + gamma * boot;
    const double v = mlp_forward(critic, s.input, &tape)[0];
    const double err = v - td_target;
    total_loss += err * err;
    const double upstream = 2.0 * err * inv_n;
    mlp_backward(critic, tape, std::span<const double>(&upstream, 1), grads);
  }
  opt.apply(critic.params, grads);
  return total_loss * inv_n;
}

void ppo_update_policy(Mlp& policy, std::span<const PolicySample> samples,
                       const TrainSchedule& sched, double ent_coef, AdamState& opt,
                       Rng& rng) {
  if (samples.empty()) return;
  const double lo = 1.0 - sched.clip_ratio;
  const double hi = 1.0 + sched.clip_ratio;
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const int nmb = std::max(1, std::min<int>(sched.minibatches, static_cast<int>(samples.size())));
  MlpTape tape;
  for (int epoch = 0; epoch < sched.ppo_epochs; ++epoch) {
    // Fisher-Yates from our own stream
    for (int k = static_cast<int>(order.size()) - 1; k > 0; --k)
      std::swap(order[k], order[rng.uniform_int(k + 1)]);
    for (int mb = 0; mb < nmb; ++mb) {
      const size_t begin = samples.size() * mb / nmb;
      const size_t end = samples.size() * (mb + 1) / nmb;
      if (begin == end) continue;
      Tensors grads = zero_grads_like(policy.params);
      const double inv_n = 1.0 / static_cast<double>(end - begin);
      for (size_t k = begin; k < end; ++k) {
        const auto& s = samples[order[k]];
        const auto probs = mlp_forward(policy, s.obs, &tape);
        std::vector<double> dprobs(probs.size(), 0.0);
        const double p_old = std::exp(s.logp_old);
        const double ratio = probs[s.action] / p_old;
        const double surr1 = ratio * s.advantage;
        const double surr2 = std::clamp(ratio, lo, hi) * s.advantage;
        if (surr1 <= surr2) {
          // unclipped branch active: d(-surr1)/dp[a] = -adv / p_old
          dprobs[s.action] += -s.advantage / p_old * inv_n;
        } else if (ratio > lo && ratio < hi) {
          dprobs[s.action] += -s.advantage / p_old * inv_n;
        }
        if (ent_coef != 0.0) {
          for (size_t a = 0; a < probs.size(); ++a)
            dprobs[a] += ent_coef * (std::log(std::max(probs[a], 1e-300)) + 1.0) * inv_n;
        }
        mlp_backward(policy, tape, dprobs, grads);
      }
      opt.apply(policy.params, grads);
    }
  }
}

std::string metrics_header(int K) {
  std::ostringstream os;
  os << "step,pair_i,pair_j,sp_return,xp_return_mean";
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (i != j) os << ",alpha1_" << i << "_" << j;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (i != j) os << ",alpha2_" << i << "_" << j;
  os << ",slack_min,entropy";
  return os.str();
}

std::string metrics_row_csv(const MetricsRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << row.step << "," << row.pair_i << "," << row.pair_j << "," << row.sp_return << ","
     << row.xp_return_mean;
  for (double a : row.alpha1) os << "," << a;
  for (double a : row.alpha2) os << "," << a;
  os << "," << row.slack_min << "," << row.entropy;
  return os.str();
}

Trainer::Trainer(const EnvConfig& env, const TrainSchedule& sched, int K, double tau,
                 uint64_t seed, WeightMode mode, double alpha)
    : env_cfg_(env),
      sched_(sched),
      mode_(mode),
      alpha_(alpha),
      rng_(seed),
      pop_(Population::create(env, K, sched, rng_)),
      lagrange_(K, tau),
      opt_critic_(AdamState::create(sched.lr_v, {})) {
  for (int k = 0; k < K; ++k) {
    opt_aht_.push_back(AdamState::create(sched.lr_pi, pop_.aht[k].params));
    opt_teammate_.push_back(AdamState::create(sched.lr_pi, pop_.teammate[k].params));
  }
  opt_critic_ = AdamState::create(sched.lr_v, pop_.critic.params);
  pair_workers_.resize(static_cast<size_t>(K) * K);
}

double Trainer::weight(int i, int j) const {
  switch (mode_) {
    case WeightMode::Lagrangian:
      return pair_weight(lagrange_, i, j);
    case WeightMode::BRDiv:
      return i == j ? 1.0 + 2.0 * (lagrange_.K - 1) * alpha_ : -2.0 * alpha_;
    case WeightMode::LIPO:
      return i == j ? 1.0 : -alpha_;
  }
  return 0.0;
}

std::vector<Trainer::Worker>& Trainer::workers_for(int i, int j) {
  auto& slot = pair_workers_[static_cast<size_t>(j) * pop_.K + i];
  if (slot.empty()) {
    slot.reserve(sched_.n_threads);
    for (int w = 0; w < sched_.n_threads; ++w)
      slot.emplace_back(env_cfg_, rng_.split(static_cast<uint64_t>(w) + 1));
  }
  return slot;
}

RolloutBatch Trainer::collect(int i, int j) {
  auto& workers = workers_for(i, j);
  RolloutBatch batch;
  batch.pair_i = i;
  batch.pair_j = j;
  const Mlp& pol_a = pop_.aht[j];
  const Mlp& pol_b = pop_.teammate[i];

  std::vector<std::vector<Transition>> buffers(workers.size());
  std::vector<double> entropies(workers.size(), 0.0);

  auto run_worker = [&](size_t w) {
    Worker& wk = workers[w];
    auto& buf = buffers[w];
    double ent = 0.0;
    for (int t = 0; t < sched_.t_update; ++t) {
      bool starting = false;
      if (wk.fresh || wk.env->done()) {
        wk.obs = wk.env->reset(wk.rng.next_u64());
        wk.fresh = false;
        starting = true;
      }
      Transition tr;
      tr.episode_start = starting;
      tr.obs_a = wk.obs.obs_a;
      tr.obs_b = wk.obs.obs_b;
      const auto pa = mlp_forward(pol_a, tr.obs_a);
      const auto pb = mlp_forward(pol_b, tr.obs_b);
      ent += 0.5 * (entropy(pa) + entropy(pb));
      tr.a_a = wk.rng.categorical(pa);
      tr.a_b = wk.rng.categorical(pb);
      tr.logp_a = log_prob(pa, tr.a_a);
      tr.logp_b = log_prob(pb, tr.a_b);
      auto res = wk.env->step(tr.a_a, tr.a_b);
      tr.reward = res.reward;
      tr.done = res.done;
      tr.next_obs_a = res.obs.obs_a;
      tr.next_obs_b = res.obs.obs_b;
      wk.obs = std::move(res.obs);
      buf.push_back(std::move(tr));
    }
    entropies[w] = ent / sched_.t_update;
  };

  const unsigned hw = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  if (workers.size() >= 2 * hw && env_cfg_.id != EnvId::RepeatedMatrix) {
    std::vector<std::thread> pool;
    for (unsigned c = 0; c < hw; ++c)
      pool.emplace_back([&, c] {
        for (size_t w = c; w < workers.size(); w += hw) run_worker(w);
      });
    for (auto& t : pool) t.join();
  } else {
    for (size_t w = 0; w < workers.size(); ++w) run_worker(w);
  }

  double ent_total = 0.0;
  for (size_t w = 0; w < workers.size(); ++w) {
    ent_total += entropies[w];
    for (auto& tr : buffers[w]) {
      if (tr.episode_start) {
        std::vector<double> ctx;
        ctx.insert(ctx.end(), tr.obs_a.begin(), tr.obs_a.end());
        ctx.insert(ctx.end(), tr.obs_b.begin(), tr.obs_b.end());
        start_obs_.push_back(std::move(ctx));
        if (start_obs_.size() > 64) start_obs_.erase(start_obs_.begin());
      }
      batch.transitions.push_back(std::move(tr));
    }
  }
  batch.mean_entropy = ent_total / static_cast<double>(workers.size());
  steps_done_ += static_cast<int64_t>(batch.transitions.size());
  return batch;
}

double Trainer::update_critic(const RolloutBatch& batch) {
  std::vector<CriticSample> samples;
  samples.reserve(batch.transitions.size());
  for (const auto& tr : batch.transitions) {
    CriticSample s;
    s.input = pop_.critic_input(tr.obs_a, tr.obs_b, batch.pair_j, batch.pair_i);
    s.next_input = pop_.critic_input(tr.next_obs_a, tr.next_obs_b, batch.pair_j, batch.pair_i);
    s.reward = tr.reward;
    s.done = tr.done;
    samples.push_back(std::move(s));
  }
  double loss = 0.0;
  for (int e = 0; e < sched_.ppo_epochs; ++e)
    loss = critic_td_update(pop_.critic, pop_.target_critic, samples, sched_.gamma, opt_critic_);
  ++critic_updates_;
  if (critic_updates_ % sched_.target_sync_period == 0)
    pop_.target_critic = pop_.critic;
  return loss;
}

void Trainer::update_policies(const RolloutBatch& batch) {
  const int i = batch.pair_i;
  const int j = batch.pair_j;
  const double w = weight(i, j);
  std::vector<PolicySample> sa, sb;
  sa.reserve(batch.transitions.size());
  sb.reserve(batch.transitions.size());
  for (const auto& tr : batch.transitions) {
    const auto in = pop_.critic_input(tr.obs_a, tr.obs_b, j, i);
    const double v = mlp_forward(pop_.critic, in)[0];
    double vn = 0.0;
    if (!tr.done) {
      const auto in2 = pop_.critic_input(tr.next_obs_a, tr.next_obs_b, j, i);
      vn = mlp_forward(pop_.critic, in2)[0];
    }
    const double adv = w * (tr.reward + sched_.gamma * vn - v);
    if (!std::isfinite(adv)) throw DivergenceError("non-finite advantage");
    sa.push_back({tr.obs_a, tr.a_a, tr.logp_a, adv});
    sb.push_back({tr.obs_b, tr.a_b, tr.logp_b, adv});
  }
  const double ent_coef = sched_.w_ent * weight(i, i);
  ppo_update_policy(pop_.aht[j], sa, sched_, ent_coef, opt_aht_[j], rng_);
  ppo_update_policy(pop_.teammate[i], sb, sched_, ent_coef, opt_teammate_[i], rng_);
  ++policy_updates_;
}

ReturnMatrix Trainer::estimate_return_matrix() {
  const int K = pop_.K;
  ReturnMatrix R(K);
  if (start_obs_.empty()) return R;
  ReturnMatrix counts(K);
  for (const auto& ctx : start_obs_) {
    const size_t half = ctx.size() / 2;
    std::span<const double> oa(ctx.data(), half);
    std::span<const double> ob(ctx.data() + half, ctx.size() - half);
    for (int d = 0; d < K; ++d) {
      R.at(d, d) += mlp_forward(pop_.critic, pop_.critic_input(oa, ob, d, d))[0];
      counts.at(d, d) += 1.0;
    }
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        if (i == j) continue;
        // slack1 of (i,j) reads V^{j,-i}; slack2 reads V^{i,-j}
        R.at(j, i) += mlp_forward(pop_.critic, pop_.critic_input(oa, ob, j, i))[0];
        counts.at(j, i) += 1.0;
        ++cross_evals_;
        R.at(i, j) += mlp_forward(pop_.critic, pop_.critic_input(oa, ob, i, j))[0];
        counts.at(i, j) += 1.0;
        ++cross_evals_;
      }
  }
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      if (counts.at(a, b) > 0.0) R.at(a, b) /= counts.at(a, b);
  return R;
}

void Trainer::check_divergence(const ReturnMatrix& R_hat) const {
  EnvInstance probe(env_cfg_);
  const double cap = 10.0 * std::max(1.0, probe.max_episode_return());
  for (double v : R_hat.values) {
    if (!std::isfinite(v) || std::abs(v) > cap)
      throw DivergenceError("critic estimate exceeded 10x the max achievable return");
  }
}

void Trainer::update_multipliers() {
  const ReturnMatrix R_hat = estimate_return_matrix();
  check_divergence(R_hat);
  lagrange_ = lagrange_update(R_hat, lagrange_, sched_.lr_alpha);
}

void Trainer::run(std::vector<MetricsRow>* metrics_out) {
  while (steps_done_ < sched_.total_steps) {
    auto [i, j] = sample_pair(pop_.K, rng_);
    RolloutBatch batch = collect(i, j);
    update_critic(batch);
    update_policies(batch);
    if (policy_updates_ % sched_.t_lagrange == 0) {
      const ReturnMatrix R_hat = estimate_return_matrix();
      check_divergence(R_hat);
      if (mode_ == WeightMode::Lagrangian)
        lagrange_ = lagrange_update(R_hat, lagrange_, sched_.lr_alpha);
      if (metrics_out) {
        MetricsRow row;
        row.step = steps_done_;
        row.pair_i = i;
        row.pair_j = j;
        double sp = 0.0, xp = 0.0;
        for (int a = 0; a < pop_.K; ++a)
          for (int b = 0; b < pop_.K; ++b)
            (a == b ? sp : xp) += R_hat.at(a, b);
        row.sp_return = sp / pop_.K;
        row.xp_return_mean = pop_.K > 1 ? xp / (pop_.K * (pop_.K - 1)) : 0.0;
        for (int a = 0; a < pop_.K; ++a)
          for (int b = 0; b < pop_.K; ++b)
            if (a != b) row.alpha1.push_back(lagrange_.a1(a, b));
        for (int a = 0; a < pop_.K; ++a)
          for (int b = 0; b < pop_.K; ++b)
            if (a != b) row.alpha2.push_back(lagrange_.a2(a, b));
        row.slack_min = min_constraint_slack(R_hat, lagrange_.tau);
        row.entropy = batch.mean_entropy;
        metrics_out->push_back(std::move(row));
      }
    }
  }
}

ReturnMatrix measure_return_matrix(const Population& pop, const EnvConfig& env, int episodes,
                                   uint64_t seed, ReturnMatrix* stderr_out) {
  const int K = pop.K;
  ReturnMatrix R(K);
  if (stderr_out) *stderr_out = ReturnMatrix(K);
  Rng rng(seed);
  for (int j = 0; j < K; ++j)
    for (int i = 0; i < K; ++i) {
      double sum = 0.0, sumsq = 0.0;
      EnvInstance e(env);
      for (int ep = 0; ep < episodes; ++ep) {
        auto obs = e.reset(rng.next_u64());
        double ret = 0.0;
        while (!e.done()) {
          const int aa = sample_action(pop.aht[j], obs.obs_a, rng, nullptr);
          const int ab = sample_action(pop.teammate[i], obs.obs_b, rng, nullptr);
          auto res = e.step(aa, ab);
          ret += res.reward;
          obs = std::move(res.obs);
        }
        sum += ret;
        sumsq += ret * ret;
      }
      const double mean = sum / episodes;
      R.at(j, i) = mean;
      if (stderr_out && episodes > 1) {
        const double var = std::max(0.0, (sumsq - episodes * mean * mean) / (episodes - 1));
        stderr_out->at(j, i) = std::sqrt(var / episodes);
      }
    }
  return R;
}

std::vector<std::vector<double>> behavior_profile(const Population& pop, const EnvConfig& env,
                                                  int episodes, uint64_t seed, bool teammates) {
  Rng rng(seed);
  std::vector<std::vector<double>> profile;
  for (int k = 0; k < pop.K; ++k) {
    const Mlp& subject = teammates ? pop.teammate[k] : pop.aht[k];
    const Mlp& partner = teammates ? pop.aht[k] : pop.teammate[k];
    const int subject_seat = teammates ? 1 : 0;
    std::vector<double> counts;
    if (env.id == EnvId::RepeatedMatrix)
      counts.assign(3, 0.0);
    else if (env.id == EnvId::LBF)
      counts.assign(6, 0.0);
    else
      counts.assign(4, 0.0);
    double total = 0.0;
    EnvInstance e(env);
    for (int ep = 0; ep < episodes; ++ep) {
      auto obs = e.reset(rng.next_u64());
      std::vector<int> collect_order;
      auto alive_before = e.item_remaining();
      while (!e.done()) {
        const auto& so = subject_seat == 0 ? obs.obs_a : obs.obs_b;
        const auto& po = subject_seat == 0 ? obs.obs_b : obs.obs_a;
        const int as = sample_action(subject, so, rng, nullptr);
        const int ap = sample_action(partner, po, rng, nullptr);
        if (env.id == EnvId::RepeatedMatrix) {
          counts[as] += 1.0;
          total += 1.0;
        }
        auto res = subject_seat == 0 ? e.step(as, ap) : e.step(ap, as);
        if (env.id == EnvId::LBF) {
          for (size_t it = 0; it < alive_before.size(); ++it)
            if (alive_before[it] && !e.item_remaining()[it])
              collect_order.push_back(static_cast<int>(it));
          alive_before = e.item_remaining();
        }
        obs = std::move(res.obs);
      }
      if (env.id == EnvId::CoopReach || env.id == EnvId::WeightedCoopReach) {
        const int c = e.corner_index(e.pos(subject_seat));
        if (c >= 0) {
          counts[c] += 1.0;
          total += 1.0;
        }
      } else if (env.id == EnvId::LBF) {
        if (collect_order.size() == 3) {
          // permutation index in lexicographic order
          int idx = collect_order[0] * 2 + (collect_order[1] > collect_order[2] ? 1 : 0);
          counts[idx] += 1.0;
          total += 1.0;
        }
      }
    }
    if (total > 0.0)
      for (double& c : counts) c /= total;
    profile.push_back(std::move(counts));
  }
  return profile;
}

}  // namespace mcsforge
