// Acceptance gate: one pass/fail line per criterion, tolerances pinned
// below. Exit code is the number of failed criteria.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <tuple>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "mcsforge/aht.hpp"
#include "mcsforge/commands.hpp"
#include "mcsforge/config.hpp"
#include "mcsforge/lstm.hpp"
#include "mcsforge/marl.hpp"
#include "mcsforge/mcs_oracle.hpp"

using namespace mcsforge;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and budgets ----
constexpr double kObjectiveTol = 0.0;          // criterion 1: exact
constexpr double kMlpGradTol = 1e-4;           // criterion 3
constexpr double kBpttGradTol = 1e-3;          // criterion 3
constexpr int kGradCoords = 120;               // criterion 3: >= 100 per model
constexpr double kMultiplierBound = 0.05;      // criterion 4
constexpr double kSlackFloor = -0.1;           // criterion 4 (per-step returns)
constexpr int kDiscoverySeedsNeeded = 3;       // criterion 4: of 4 seeds
constexpr int kBaselineMajority = 3;           // criterion 5: of 4 seeds
constexpr double kOverallPerStepFloor = 6.0;   // criterion 7
constexpr double kVsH1PerStepFloor = 9.0;      // criterion 7
constexpr double kIdentGainFloor = -0.05;      // criterion 7: per-step, matrix
constexpr double kIdentGainFloorCr = -0.02;    // criterion 7: coop reach
constexpr double kCeilingSlack = 0.60;         // criterion 7: episodic MC noise margin

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int idx, const char* name, bool ok, double secs) {
  std::printf("criterion %d (%s): %s [%.1fs]\n", idx, name, ok ? "PASS" : "FAIL", secs);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

ReturnMatrix make(std::initializer_list<std::initializer_list<double>> rows) {
  ReturnMatrix R(static_cast<int>(rows.size()));
  int j = 0;
  for (const auto& row : rows) {
    int i = 0;
    for (double v : row) R.at(j, i++) = v;
    ++j;
  }
  return R;
}

// ---- criterion 1: analytic objective tables, tolerance 0 ----
bool criterion_objectives() {
  const ReturnMatrix identity3 = make({{10, 0, 4}, {0, 6, 4}, {4, 4, 6}});
  const ReturnMatrix alt3 = make({{10, 0, 0}, {0, 6, 6}, {0, 6, 6}});
  const ReturnMatrix identity4 =
      make({{10, 0, 6, 6}, {0, 10, 6, 6}, {6, 6, 8, 0}, {6, 6, 0, 8}});
  const ReturnMatrix alt4 =
      make({{10, 10, 0, 0}, {10, 10, 0, 0}, {0, 0, 10, 10}, {0, 0, 10, 10}});
  bool ok = true;
  for (double a : {0.1, 0.5, 1.0, 5.0}) {
    ok = ok && std::fabs(brdiv_objective(identity3, a) - (22.0 + a * 56.0)) <= kObjectiveTol;
    ok = ok && std::fabs(brdiv_objective(alt3, a) - (22.0 + a * 64.0)) <= kObjectiveTol;
    ok = ok && std::fabs(lipo_objective(identity3, a) - (22.0 - a * 16.0)) <= kObjectiveTol;
    ok = ok && std::fabs(lipo_objective(alt3, a) - (22.0 - a * 12.0)) <= kObjectiveTol;
    ok = ok && std::fabs(brdiv_objective(identity4, a) - (36.0 + a * 120.0)) <= kObjectiveTol;
    ok = ok && std::fabs(brdiv_objective(alt4, a) - (40.0 + a * 160.0)) <= kObjectiveTol;
    ok = ok && std::fabs(lipo_objective(identity4, a) - (36.0 - a * 48.0)) <= kObjectiveTol;
    ok = ok && std::fabs(lipo_objective(alt4, a) - (40.0 - a * 40.0)) <= kObjectiveTol;
  }
  return ok;
}

// ---- criterion 2: exact coverage sets ----
bool criterion_mcs() {
  const ReturnMatrix Rm = exact_return_matrix(PolicyUniverse::matrix_universe());
  const auto sets_m = minimal_coverage_sets(Rm);
  bool ok = sets_m.size() == 1 && sets_m[0] == std::vector<int>{0, 1, 2};

  const ReturnMatrix Rw =
      exact_return_matrix(PolicyUniverse::reaching_corner_universe(EnvId::WeightedCoopReach));
  const auto sets_w = minimal_coverage_sets(Rw);
  ok = ok && sets_w.size() == 1 && sets_w[0] == std::vector<int>{0, 1, 2, 3};
  return ok;
}

// ---- criterion 3: gradient checks for every configured architecture ----
double grad_check_mlp(std::vector<int> dims, Head head, uint64_t seed) {
  Rng rng(seed);
  Mlp net = Mlp::create(std::move(dims), head, rng);
  std::vector<double> input(net.input_dim()), u(net.output_dim());
  for (double& x : input) x = rng.normal();
  for (double& x : u) x = rng.normal();

  MlpTape tape;
  mlp_forward(net, input, &tape);
  Tensors grads = zero_grads_like(net.params);
  mlp_backward(net, tape, u, grads);

  auto loss = [&] {
    const auto out = mlp_forward(net, input);
    return std::inner_product(out.begin(), out.end(), u.begin(), 0.0);
  };
  double worst = 0.0;
  for (int n = 0; n < kGradCoords; ++n) {
    const int t = rng.uniform_int(static_cast<int>(net.params.size()));
    if (net.params[t].empty()) continue;
    const int k = rng.uniform_int(static_cast<int>(net.params[t].size()));
    double& coord = net.params[t][k];
    const double saved = coord, eps = 1e-6;
    coord = saved + eps;
    const double hi = loss();
    coord = saved - eps;
    const double lo = loss();
    coord = saved;
    const double fd = (hi - lo) / (2.0 * eps);
    const double denom = std::max({std::fabs(grads[t][k]), std::fabs(fd), 1e-3});
    worst = std::max(worst, std::fabs(grads[t][k] - fd) / denom);
  }
  return worst;
}

double grad_check_lstm(int input_dim, int hidden, uint64_t seed) {
  Rng rng(seed);
  LstmCell cell = LstmCell::create(input_dim, hidden, rng);
  const int T = 6;
  std::vector<std::vector<double>> xs(T), us(T);
  for (int t = 0; t < T; ++t) {
    xs[t].resize(input_dim);
    us[t].resize(hidden);
    for (double& x : xs[t]) x = rng.normal();
    for (double& x : us[t]) x = 0.5 * rng.normal();
  }
  auto loss = [&](std::vector<LstmStepTape>* tapes) {
    LstmState st = lstm_zero_state(cell);
    double L = 0.0;
    for (int t = 0; t < T; ++t) {
      LstmStepTape tape;
      const auto h = lstm_step(cell, xs[t], st, tapes ? &tape : nullptr);
      if (tapes) tapes->push_back(std::move(tape));
      L += std::inner_product(h.begin(), h.end(), us[t].begin(), 0.0);
    }
    return L;
  };
  std::vector<LstmStepTape> tapes;
  loss(&tapes);
  Tensors grads = zero_grads_like(cell.params);
  lstm_backward(cell, tapes, us, grads);

  double worst = 0.0;
  for (int n = 0; n < kGradCoords; ++n) {
    const int t = rng.uniform_int(static_cast<int>(cell.params.size()));
    const int k = rng.uniform_int(static_cast<int>(cell.params[t].size()));
    double& coord = cell.params[t][k];
    const double saved = coord, eps = 1e-5;
    coord = saved + eps;
    const double hi = loss(nullptr);
    coord = saved - eps;
    const double lo = loss(nullptr);
    coord = saved;
    const double fd = (hi - lo) / (2.0 * eps);
    const double denom = std::max({std::fabs(grads[t][k]), std::fabs(fd), 1e-3});
    worst = std::max(worst, std::fabs(grads[t][k] - fd) / denom);
  }
  return worst;
}

bool criterion_gradients() {
  bool ok = true;
  // every configured feed-forward width, both heads
  const std::vector<std::vector<int>> hiddens = {{32, 32}, {128, 256, 256, 128}, {128, 128}};
  uint64_t seed = 100;
  for (const auto& h : hiddens) {
    std::vector<int> pol = {13};
    pol.insert(pol.end(), h.begin(), h.end());
    pol.push_back(5);
    std::vector<int> val = {34};
    val.insert(val.end(), h.begin(), h.end());
    val.push_back(1);
    const double ep = grad_check_mlp(pol, Head::SoftmaxLogits, seed++);
    const double ev = grad_check_mlp(val, Head::Scalar, seed++);
    ok = ok && ep < kMlpGradTol && ev < kMlpGradTol;
  }
  // every configured recurrent width
  for (int width : {16, 32, 64}) {
    const double e = grad_check_lstm(20, width, seed++);
    ok = ok && e < kBpttGradTol;
  }
  return ok;
}

// shared desk-scale generation schedule (matrix game)
TrainSchedule desk_schedule() {
  ExperimentConfig base = default_experiment_config(EnvId::RepeatedMatrix);
  TrainSchedule sched = base.gen;
  sched.total_steps = 200000;
  sched.n_threads = 8;
  return sched;
}

std::vector<int> argmax_actions(const Population& pop, const EnvConfig& env) {
  const auto profile = behavior_profile(pop, env, 300, 9999, true);
  std::vector<int> out;
  for (const auto& row : profile)
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  return out;
}

// ---- criterion 4: constrained discovery of all three matrix policies ----
bool criterion_discovery() {
  const EnvConfig env = default_env_config(EnvId::RepeatedMatrix);
  const TrainSchedule sched = desk_schedule();
  int good = 0;
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    Trainer trainer(env, sched, 3, 1.0, seed);
    trainer.run();
    const auto actions = argmax_actions(trainer.population(), env);
    std::set<int> distinct(actions.begin(), actions.end());
    const bool perm_ok = distinct == std::set<int>{0, 1, 2};

    const bool mult_ok = trainer.multipliers().max_multiplier() < kMultiplierBound;

    ReturnMatrix R = measure_return_matrix(trainer.population(), env, 200, 4242);
    for (double& v : R.values) v /= env.horizon;  // per-step scale, tau = 1
    const bool slack_ok = min_constraint_slack(R, 1.0) >= kSlackFloor;

    std::printf("  seed %llu: argmax={%d,%d,%d} perm=%d max_mult=%.4f slack_min=%.3f\n",
                (unsigned long long)seed, actions[0], actions[1], actions[2],
                perm_ok ? 1 : 0, trainer.multipliers().max_multiplier(),
                min_constraint_slack(R, 1.0));
    if (perm_ok && mult_ok && slack_ok) ++good;
  }
  std::printf("  seeds passing all sub-checks: %d/4\n", good);
  return good >= kDiscoverySeedsNeeded;
}

// ---- criterion 5: fixed-weight baselines collapse to two policies ----
bool criterion_baselines() {
  const EnvConfig env = default_env_config(EnvId::RepeatedMatrix);
  const TrainSchedule sched = desk_schedule();
  const ReturnMatrix identity3 = make({{10, 0, 4}, {0, 6, 4}, {4, 4, 6}});
  bool ok = true;
  for (auto [mode, alpha, name] :
       {std::tuple{WeightMode::BRDiv, 1.0, "brdiv"}, std::tuple{WeightMode::LIPO, 0.5, "lipo"}}) {
    int collapsed = 0;
    bool dominance_checked = false, dominance_ok = false;
    for (uint64_t seed = 1; seed <= 4; ++seed) {
      Trainer trainer(env, sched, 3, 1.0, seed, mode, alpha);
      trainer.run();
      const auto actions = argmax_actions(trainer.population(), env);
      std::set<int> distinct(actions.begin(), actions.end());
      std::printf("  %s seed %llu: argmax={%d,%d,%d} distinct=%zu\n", name,
                  (unsigned long long)seed, actions[0], actions[1], actions[2],
                  distinct.size());
      if (distinct.size() > 2) continue;
      ++collapsed;
      if (!dominance_checked) {
        // the measured matrix of a collapsed population must beat the
        // 3-policy identity population on the same fixed objective
        dominance_checked = true;
        ReturnMatrix R = measure_return_matrix(trainer.population(), env, 200, 777);
        for (double& v : R.values) v /= env.horizon;
        const double trained = mode == WeightMode::BRDiv ? brdiv_objective(R, alpha)
                                                         : lipo_objective(R, alpha);
        const double ident = mode == WeightMode::BRDiv
                                 ? brdiv_objective(identity3, alpha)
                                 : lipo_objective(identity3, alpha);
        dominance_ok = trained > ident;
        std::printf("  %s dominance: trained=%.3f identity=%.3f\n", name, trained, ident);
      }
    }
    std::printf("  %s collapsed seeds: %d/4\n", name, collapsed);
    ok = ok && collapsed >= kBaselineMajority && dominance_checked && dominance_ok;
  }
  return ok;
}

// ---- criterion 6: weighted-advantage semantics ----
bool criterion_weight_semantics() {
  const EnvConfig env = default_env_config(EnvId::RepeatedMatrix);
  TrainSchedule sched = desk_schedule();
  sched.n_threads = 1;
  sched.t_update = 32;
  sched.w_ent = 0.0;  // entropy disabled for the bitwise check
  sched.ppo_epochs = 1;
  sched.minibatches = 1;

  // all multipliers zero -> a cross-pair batch must not move any parameter
  Trainer trainer(env, sched, 3, 1.0, 5);
  std::vector<Tensors> before;
  for (const auto& net : trainer.population().aht) before.push_back(net.params);
  for (const auto& net : trainer.population().teammate) before.push_back(net.params);
  const RolloutBatch batch = trainer.collect(0, 1);  // i != j
  trainer.update_policies(batch);
  bool zero_ok = true;
  size_t idx = 0;
  for (const auto* group : {&trainer.population().aht, &trainer.population().teammate})
    for (const auto& net : *group) {
      const Tensors& was = before[idx++];
      for (size_t t = 0; t < was.size(); ++t)
        zero_ok = zero_ok && std::memcmp(net.params[t].data(), was[t].data(),
                                         was[t].size() * sizeof(double)) == 0;
    }

  // flipping the pair weight's sign flips every parameter movement
  Rng init(17);
  const Mlp base = Mlp::create({1, 16, 3}, Head::SoftmaxLogits, init);
  auto run_signed = [&](double sign) {
    Mlp policy = base;
    Rng data(23);
    std::vector<PolicySample> samples;
    for (int k = 0; k < 48; ++k) {
      const std::vector<double> obs = {data.uniform()};
      const auto p = mlp_forward(policy, obs);
      const int a = data.uniform_int(3);
      samples.push_back({obs, a, std::log(p[a]), sign * (0.25 + data.uniform())});
    }
    AdamState opt = AdamState::create(1e-3, policy.params);
    Rng shuffle(29);
    ppo_update_policy(policy, samples, sched, 0.0, opt, shuffle);
    return policy.params;
  };
  const Tensors plus = run_signed(1.0), minus = run_signed(-1.0);
  bool sign_ok = true;
  int moved = 0;
  for (size_t t = 0; t < plus.size(); ++t)
    for (size_t k = 0; k < plus[t].size(); ++k) {
      const double dp = plus[t][k] - base.params[t][k];
      const double dm = minus[t][k] - base.params[t][k];
      if (dp == 0.0 && dm == 0.0) continue;
      ++moved;
      sign_ok = sign_ok && dp * dm < 0.0;
    }
  sign_ok = sign_ok && moved > 0;
  std::printf("  zero-weight bitwise no-op: %d, sign flip on %d coords: %d\n",
              zero_ok ? 1 : 0, moved, sign_ok ? 1 : 0);
  return zero_ok && sign_ok;
}

// ---- criterion 7: adaptive-agent pipeline at desk scale ----
bool criterion_aht() {
  bool ok = true;

  // matrix game, against the oracle 3-policy training set
  {
    const EnvConfig env = default_env_config(EnvId::RepeatedMatrix);
    AhtSchedule sched = default_experiment_config(EnvId::RepeatedMatrix).aht;
    sched.total_steps = 3000000;
    sched.lr = 3e-4;
    sched.meta_batch = 32;
    sched.w_ent = 3e-5;
    sched.lstm_hidden = 32;
    const uint64_t seed = 1;
    TeammateSet tm = heuristic_teammates(EnvId::RepeatedMatrix, {1, 2, 3}, seed + 1000);
    const AhtAgent agent = train_aht(env, tm, sched, seed);
    const RobustnessReport rep =
        evaluate_robustness(agent, env, {1, 2, 3, 4, 5, 6}, 100, seed);

    const double per_step = rep.overall_mean / env.horizon;
    const double vs_h1 = rep.mean_return[0] / env.horizon;
    const bool score_ok = per_step >= kOverallPerStepFloor && vs_h1 >= kVsH1PerStepFloor;

    double gain = 0.0;
    for (const auto& curve : rep.by_episode_index)
      gain += (curve.back() - curve.front()) / rep.by_episode_index.size();
    const bool gain_ok = gain / env.horizon >= kIdentGainFloor;

    const auto ceiling =
        oracle_best_response_returns(env, {1, 2, 3, 4, 5, 6}, {1, 2, 3}, 2000, 77);
    bool ceiling_ok = true;
    for (size_t k = 0; k < ceiling.size(); ++k)
      ceiling_ok = ceiling_ok && rep.mean_return[k] <= ceiling[k] + kCeilingSlack;

    std::printf("  matrix: overall=%.3f/step vs_h1=%.3f/step ident_gain=%.3f ceiling=%d\n",
                per_step, vs_h1, gain / env.horizon, ceiling_ok ? 1 : 0);
    ok = ok && score_ok && gain_ok && ceiling_ok;
  }

  // 5x5 cooperative reaching: property checks only
  {
    EnvConfig env = default_env_config(EnvId::CoopReach);
    env.grid_dim = 5;
    AhtSchedule sched;
    sched.total_steps = 1000000;
    sched.lr = 3e-4;
    sched.meta_batch = 16;
    sched.w_ent = 1e-4;
    sched.trunk_hidden = {64};
    sched.lstm_hidden = 32;
    const uint64_t seed = 1;
    const std::vector<int> corners = {8, 9, 10, 11};
    TeammateSet tm = heuristic_teammates(EnvId::CoopReach, corners, seed + 1000);
    const AhtAgent agent = train_aht(env, tm, sched, seed);
    const RobustnessReport rep = evaluate_robustness(agent, env, corners, 100, seed);

    double gain = 0.0;
    for (const auto& curve : rep.by_episode_index)
      gain += (curve.back() - curve.front()) / rep.by_episode_index.size();
    const bool gain_ok = gain >= kIdentGainFloorCr;

    // best scripted response reaches the partner's corner: ceiling 1.0
    const auto ceiling = oracle_best_response_returns(env, corners, corners, 200, 77);
    bool ceiling_ok = true;
    for (size_t k = 0; k < ceiling.size(); ++k)
      ceiling_ok = ceiling_ok && rep.mean_return[k] <= ceiling[k] + 1e-9;

    std::printf("  coop_reach 5x5: overall=%.3f ident_gain=%.3f ceiling=%d\n",
                rep.overall_mean, gain, ceiling_ok ? 1 : 0);
    ok = ok && gain_ok && ceiling_ok;
  }
  return ok;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---- criterion 8: manifest reruns are bit-for-bit reproducible ----
bool criterion_determinism() {
  const fs::path tmp = fs::temp_directory_path() /
                       ("mcsforge_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "env": {"id": "matrix"},
    "generation": {"total_steps": 8000, "n_threads": 1},
    "runtime": {"seeds": [7]}
  })");
  const auto dirs = cmd_generate(cfg, tmp.string());
  const fs::path run(dirs.at(0));
  const std::string redo =
      cmd_rerun((run / "manifest.json").string(), (tmp / "redo").string());
  const bool metrics_ok = !slurp(run / "metrics.csv").empty() &&
                          slurp(run / "metrics.csv") == slurp(fs::path(redo) / "metrics.csv");
  const bool ckpt_ok =
      slurp(run / "population.ckpt") == slurp(fs::path(redo) / "population.ckpt");
  fs::remove_all(tmp);
  return metrics_ok && ckpt_ok;
}

}  // namespace

int main() {
  {
    Timer t;
    const bool ok = criterion_objectives();
    report(1, "analytic objective tables, tolerance 0", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_mcs();
    report(2, "exact minimal coverage sets", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_gradients();
    report(3, "gradient checks, all architectures", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_discovery();
    report(4, "constrained discovery of all matrix policies", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_baselines();
    report(5, "fixed-weight baseline collapse + dominance", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_weight_semantics();
    report(6, "weighted-advantage semantics", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_aht();
    report(7, "adaptive-agent desk pipeline", ok, t.secs());
  }
  {
    Timer t;
    const bool ok = criterion_determinism();
    report(8, "bit-for-bit manifest reruns", ok, t.secs());
  }
  std::printf("%s (%d of 8 criteria failed)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures);
  return g_failures;
}
