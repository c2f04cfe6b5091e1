#include "mcsforge/heuristics.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace mcsforge {

namespace {

const std::array<std::array<double, 3>, 3> kMatrixMixtures = {{
    {0.70, 0.15, 0.15},  // H4
    {0.15, 0.70, 0.15},  // H5
    {0.15, 0.15, 0.70},  // H6
}};

// H12..H15 destination distributions over corners A..D
const std::array<std::array<double, 4>, 4> kBiasedCornerDist = {{
    {0.55, 0.15, 0.15, 0.15},
    {0.15, 0.55, 0.15, 0.15},
    {0.15, 0.15, 0.55, 0.15},
    {0.15, 0.15, 0.15, 0.55},
}};

std::vector<std::vector<int>> item_permutations(int n) {
  std::vector<int> base(n);
  std::iota(base.begin(), base.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

}  // namespace

int HeuristicTeammate::count_for(EnvId id) {
  switch (id) {
    case EnvId::RepeatedMatrix: return 6;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach: return 15;
    case EnvId::LBF: return 8;
  }
  return 0;
}

HeuristicTeammate::HeuristicTeammate(EnvId env_id, int heuristic_id, uint64_t seed)
    : env_id_(env_id), id_(heuristic_id), rng_(seed) {
  if (heuristic_id < 1 || heuristic_id > count_for(env_id))
    throw std::invalid_argument("heuristic id out of range for environment");
}

bool HeuristicTeammate::is_deterministic() const {
  switch (env_id_) {
    case EnvId::RepeatedMatrix: return id_ <= 3;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach: return id_ != 7 && id_ < 12;
    case EnvId::LBF: return id_ >= 3;
  }
  return false;
}

int greedy_move_toward(const EnvInstance& env, const Cell& from, const Cell& target) {
  if (from == target) return kNoop;
  auto blocked = [&](Cell c) {
    if (c.x < 0 || c.y < 0 || c.x >= env.config().grid_dim || c.y >= env.config().grid_dim)
      return true;
    // never transit a corner that is not the destination; corners are
    // reward-triggering cells in the reaching environments
    if (!(c == target) && env.corner_index(c) >= 0) return true;
    const auto& items = env.item_cells();
    const auto& alive = env.item_remaining();
    for (size_t k = 0; k < items.size(); ++k)
      if (alive[k] && items[k] == c) return true;
    return false;
  };
  int horizontal = from.x < target.x ? kRight : kLeft;
  int vertical = from.y < target.y ? kDown : kUp;
  auto moved = [&](int a) {
    Cell n = from;
    if (a == kUp) n.y -= 1;
    if (a == kDown) n.y += 1;
    if (a == kLeft) n.x -= 1;
    if (a == kRight) n.x += 1;
    return n;
  };
  if (from.x != target.x && !blocked(moved(horizontal))) return horizontal;
  if (from.y != target.y && !blocked(moved(vertical))) return vertical;
  if (from.x != target.x && from.y != target.y) {
    // preferred axis blocked by an item; detour on the free axis
    if (!blocked(moved(vertical))) return vertical;
  }
  // fully blocked toward the target; sidestep vertically if possible
  if (!blocked(moved(kDown))) return kDown;
  if (!blocked(moved(kUp))) return kUp;
  return kNoop;
}

int HeuristicTeammate::reaching_destination(const EnvInstance& env, int seat) {
  auto corners = env.corners();
  const Cell start = env.pos(seat);
  auto pick = [&](bool nearest, std::vector<int> among) {
    int best = among.front();
    int best_d = manhattan(start, corners[best]);
    for (int k : among) {
      int d = manhattan(start, corners[k]);
      if ((nearest && d < best_d) || (!nearest && d > best_d)) {
        best = k;
        best_d = d;
      }
    }
    return best;
  };
  switch (id_) {
    case 1: return pick(true, {0, 1, 2, 3});
    case 2: return pick(false, {0, 1, 2, 3});
    case 3: return pick(true, {0, 1});
    case 4: return pick(false, {0, 1});
    case 5: return pick(true, {2, 3});
    case 6: return pick(false, {2, 3});
    case 7: return rng_.uniform_int(4);
    case 8: case 9: case 10: case 11: return id_ - 8;
    default: {
      const auto& dist = kBiasedCornerDist[id_ - 12];
      return rng_.categorical(dist);
    }
  }
}

void HeuristicTeammate::begin_episode(const EnvInstance& env, int seat) {
  switch (env_id_) {
    case EnvId::RepeatedMatrix:
      break;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach:
      dest_corner_ = reaching_destination(env, seat);
      break;
    case EnvId::LBF:
      order_pos_ = 0;
      current_target_ = -1;
      if (id_ >= 3) {
        auto perms = item_permutations(static_cast<int>(env.item_cells().size()));
        order_ = perms[(id_ - 3) % perms.size()];
      } else {
        order_.clear();
      }
      break;
  }
}

int HeuristicTeammate::lbf_next_target(const EnvInstance& env, int seat) const {
  const auto& items = env.item_cells();
  const auto& alive = env.item_remaining();
  if (!order_.empty()) {
    for (size_t k = order_pos_; k < order_.size(); ++k)
      if (alive[order_[k]]) return order_[k];
    return -1;
  }
  // H1 nearest / H2 farthest from current location, ties to lowest index
  const Cell here = env.pos(seat);
  int best = -1, best_d = 0;
  for (size_t k = 0; k < items.size(); ++k) {
    if (!alive[k]) continue;
    int d = manhattan(here, items[k]);
    if (best < 0 || (id_ == 1 ? d < best_d : d > best_d)) {
      best = static_cast<int>(k);
      best_d = d;
    }
  }
  return best;
}

int HeuristicTeammate::act(const EnvInstance& env, int seat) {
  switch (env_id_) {
    case EnvId::RepeatedMatrix: {
      if (id_ <= 3) return id_ - 1;
      return rng_.categorical(kMatrixMixtures[id_ - 4]);
    }
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach: {
      return greedy_move_toward(env, env.pos(seat), env.corners()[dest_corner_]);
    }
    case EnvId::LBF: {
      int target = lbf_next_target(env, seat);
      if (target < 0) return kNoop;
      const Cell item = env.item_cells()[target];
      const Cell here = env.pos(seat);
      if (manhattan(here, item) == 1) return kCollect;
      return greedy_move_toward(env, here, item);
    }
  }
  return 0;
}

}  // namespace mcsforge
