#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mcsforge/env.hpp"
#include "mcsforge/rng.hpp"

namespace mcsforge {

// Scripted evaluation teammate. Ids are 1-based:
//   matrix: H1..H6, reaching: H1..H15, LBF: H1..H8.
// Stochastic choices (destinations, sampled actions) are drawn from the
// instance's own stream so trajectories replay bit-for-bit per seed.
class HeuristicTeammate {
 public:
  HeuristicTeammate(EnvId env_id, int heuristic_id, uint64_t seed);

  // call after env.reset(); fixes per-episode choices (destination, ordering)
  void begin_episode(const EnvInstance& env, int seat);
  int act(const EnvInstance& env, int seat);

  EnvId env_id() const { return env_id_; }
  int id() const { return id_; }
  bool is_deterministic() const;

  static int count_for(EnvId id);

 private:
  int reaching_destination(const EnvInstance& env, int seat);
  int lbf_next_target(const EnvInstance& env, int seat) const;

  EnvId env_id_;
  int id_;
  Rng rng_;
  int dest_corner_ = -1;      // reaching
  std::vector<int> order_;    // LBF collection order
  int order_pos_ = 0;
  int current_target_ = -1;   // LBF item index
};

// greedy shortest-path move toward `target`, ties broken axis-first
// (horizontal before vertical); falls back to the other axis when the
// preferred move is blocked by an item cell
int greedy_move_toward(const EnvInstance& env, const Cell& from, const Cell& target);

}  // namespace mcsforge
