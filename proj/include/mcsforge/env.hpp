#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsforge/rng.hpp"

namespace mcsforge {

enum class EnvId { RepeatedMatrix, CoopReach, WeightedCoopReach, LBF };

EnvId env_id_from_string(const std::string& s);
std::string env_id_to_string(EnvId id);

struct JointObservation {
  std::vector<double> obs_a;  // AHT-side seat
  std::vector<double> obs_b;  // teammate seat
  int t = 0;
};

struct StepResult {
  JointObservation obs;
  double reward = 0.0;
  bool done = false;
};

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

inline int manhattan(const Cell& a, const Cell& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Repeated matrix game payoff, rows = seat-A action, cols = seat-B action.
inline constexpr std::array<std::array<double, 3>, 3> kMatrixPayoff = {{
    {10.0, 0.0, 4.0},
    {0.0, 6.0, 4.0},
    {4.0, 4.0, 6.0},
}};

// Weighted reaching payoff indexed by (corner of seat A, corner of seat B),
// corners labeled A..D clockwise from the top-left.
inline constexpr std::array<std::array<double, 4>, 4> kWeightedCornerPayoff = {{
    {10.0, 0.0, 6.0, 6.0},
    {0.0, 10.0, 6.0, 6.0},
    {6.0, 6.0, 8.0, 0.0},
    {6.0, 6.0, 0.0, 8.0},
}};

// Grid move actions. 4 = no-op, 5 = collect (LBF only).
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kNoop = 4, kCollect = 5 };

struct EnvConfig {
  EnvId id = EnvId::RepeatedMatrix;
  int horizon = 5;    // matrix default; grid envs default 50
  int grid_dim = 7;   // reaching envs; LBF uses 8
  int num_items = 3;  // LBF
};

EnvConfig default_env_config(EnvId id);

// Two-player episodic environment with shared reward. Single-threaded;
// run many instances with independent seeds for parallel collection.
class EnvInstance {
 public:
  explicit EnvInstance(const EnvConfig& cfg);

  JointObservation reset(uint64_t seed);
  StepResult step(int a_i, int a_neg_i);

  int num_actions() const;
  int obs_size() const;
  bool done() const { return done_; }
  int t() const { return t_; }
  const EnvConfig& config() const { return cfg_; }

  // exposed for heuristics and the exact oracle
  Cell pos(int seat) const { return pos_[seat]; }
  std::vector<Cell> corners() const;
  const std::vector<Cell>& item_cells() const { return items_; }
  const std::vector<bool>& item_remaining() const { return item_alive_; }
  int corner_index(const Cell& c) const;  // -1 if not a corner

  // deterministic placement override used by the exact oracle
  void reset_with_positions(const Cell& a, const Cell& b);

  double max_episode_return() const;

 private:
  JointObservation observe() const;
  void place_agents(Rng& rng);
  void place_items(Rng& rng);
  Cell apply_move(const Cell& c, int action) const;

  EnvConfig cfg_;
  int t_ = 0;
  bool done_ = true;
  std::array<Cell, 2> pos_{};
  std::vector<Cell> items_;
  std::vector<bool> item_alive_;
  int items_left_ = 0;
};

std::vector<int> enumerate_actions(EnvId id);

}  // namespace mcsforge
