#include "mcsforge/env.hpp"

#include <algorithm>
#include <cmath>

namespace mcsforge {

EnvId env_id_from_string(const std::string& s) {
  if (s == "matrix" || s == "repeated_matrix") return EnvId::RepeatedMatrix;
  if (s == "coop_reach" || s == "cr") return EnvId::CoopReach;
  if (s == "weighted_coop_reach" || s == "wcr") return EnvId::WeightedCoopReach;
  if (s == "lbf") return EnvId::LBF;
  throw std::invalid_argument("unknown environment id: " + s);
}

std::string env_id_to_string(EnvId id) {
  switch (id) {
    case EnvId::RepeatedMatrix: return "matrix";
    case EnvId::CoopReach: return "coop_reach";
    case EnvId::WeightedCoopReach: return "weighted_coop_reach";
    case EnvId::LBF: return "lbf";
  }
  return "?";
}

EnvConfig default_env_config(EnvId id) {
  EnvConfig cfg;
  cfg.id = id;
  switch (id) {
    case EnvId::RepeatedMatrix:
      cfg.horizon = 5;
      break;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach:
      cfg.horizon = 50;
      cfg.grid_dim = 7;
      break;
    case EnvId::LBF:
      cfg.horizon = 50;
      cfg.grid_dim = 8;
      cfg.num_items = 3;
      break;
  }
  return cfg;
}

std::vector<int> enumerate_actions(EnvId id) {
  switch (id) {
    case EnvId::RepeatedMatrix: return {0, 1, 2};
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach: return {0, 1, 2, 3, 4};
    case EnvId::LBF: return {0, 1, 2, 3, 4, 5};
  }
  return {};
}

EnvInstance::EnvInstance(const EnvConfig& cfg) : cfg_(cfg) {
  if (cfg_.horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (cfg_.id != EnvId::RepeatedMatrix && cfg_.grid_dim < 3)
    throw std::invalid_argument("grid_dim must be at least 3");
  if (cfg_.id == EnvId::LBF && cfg_.num_items < 1)
    throw std::invalid_argument("num_items must be positive");
}

int EnvInstance::num_actions() const {
  return static_cast<int>(enumerate_actions(cfg_.id).size());
}

int EnvInstance::obs_size() const {
  switch (cfg_.id) {
    case EnvId::RepeatedMatrix: return 1;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach: return 13;  // positions (4) + corners (8) + time
    case EnvId::LBF: return 5 + 3 * cfg_.num_items;
  }
  return 0;
}

std::vector<Cell> EnvInstance::corners() const {
  const int g = cfg_.grid_dim - 1;
  // A..D clockwise from the top-left
  return {{0, 0}, {g, 0}, {g, g}, {0, g}};
}

int EnvInstance::corner_index(const Cell& c) const {
  auto cs = corners();
  for (int k = 0; k < 4; ++k)
    if (cs[k] == c) return k;
  return -1;
}

void EnvInstance::place_agents(Rng& rng) {
  auto blocked = [&](const Cell& c) {
    if (corner_index(c) >= 0) return true;
    for (size_t k = 0; k < items_.size(); ++k)
      if (item_alive_[k] && items_[k] == c) return true;
    return false;
  };
  for (int seat = 0; seat < 2; ++seat) {
    Cell c;
    do {
      c = {rng.uniform_int(cfg_.grid_dim), rng.uniform_int(cfg_.grid_dim)};
    } while (blocked(c));
    pos_[seat] = c;
  }
}

void EnvInstance::place_items(Rng& rng) {
  items_.clear();
  while (static_cast<int>(items_.size()) < cfg_.num_items) {
    Cell c = {rng.uniform_int(cfg_.grid_dim), rng.uniform_int(cfg_.grid_dim)};
    if (corner_index(c) >= 0) continue;
    bool ok = true;
    for (const Cell& other : items_)
      if (manhattan(c, other) < 2 || c == other) ok = false;
    if (ok) items_.push_back(c);
  }
  item_alive_.assign(items_.size(), true);
  items_left_ = cfg_.num_items;
}

JointObservation EnvInstance::reset(uint64_t seed) {
  Rng rng(seed);
  t_ = 0;
  done_ = false;
  items_.clear();
  item_alive_.clear();
  switch (cfg_.id) {
    case EnvId::RepeatedMatrix:
      break;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach:
      place_agents(rng);
      break;
    case EnvId::LBF:
      place_items(rng);
      place_agents(rng);
      break;
  }
  return observe();
}

void EnvInstance::reset_with_positions(const Cell& a, const Cell& b) {
  if (cfg_.id == EnvId::RepeatedMatrix)
    throw std::logic_error("reset_with_positions needs a grid environment");
  t_ = 0;
  done_ = false;
  pos_ = {a, b};
  if (cfg_.id == EnvId::LBF && items_.empty())
    throw std::logic_error("LBF items must be placed before positional reset");
  if (cfg_.id == EnvId::LBF) {
    item_alive_.assign(items_.size(), true);
    items_left_ = cfg_.num_items;
  }
}

JointObservation EnvInstance::observe() const {
  JointObservation o;
  o.t = t_;
  const double tnorm = static_cast<double>(t_) / cfg_.horizon;
  if (cfg_.id == EnvId::RepeatedMatrix) {
    o.obs_a = {tnorm};
    o.obs_b = {tnorm};
    return o;
  }
  const double scale = 1.0 / (cfg_.grid_dim - 1);
  auto build = [&](int self, int other) {
    std::vector<double> v;
    v.reserve(obs_size());
    v.push_back(pos_[self].x * scale);
    v.push_back(pos_[self].y * scale);
    v.push_back(pos_[other].x * scale);
    v.push_back(pos_[other].y * scale);
    if (cfg_.id == EnvId::LBF) {
      for (size_t k = 0; k < items_.size(); ++k) {
        v.push_back(items_[k].x * scale);
        v.push_back(items_[k].y * scale);
        v.push_back(item_alive_[k] ? 1.0 : 0.0);
      }
    } else {
      for (const Cell& c : corners()) {
        v.push_back(c.x * scale);
        v.push_back(c.y * scale);
      }
    }
    v.push_back(tnorm);
    return v;
  };
  o.obs_a = build(0, 1);
  o.obs_b = build(1, 0);
  return o;
}

Cell EnvInstance::apply_move(const Cell& c, int action) const {
  Cell n = c;
  switch (action) {
    case kUp: n.y -= 1; break;
    case kDown: n.y += 1; break;
    case kLeft: n.x -= 1; break;
    case kRight: n.x += 1; break;
    default: return c;  // no-op / collect
  }
  if (n.x < 0 || n.y < 0 || n.x >= cfg_.grid_dim || n.y >= cfg_.grid_dim) return c;
  // item cells are not walkable
  for (size_t k = 0; k < items_.size(); ++k)
    if (item_alive_[k] && items_[k] == n) return c;
  return n;
}

StepResult EnvInstance::step(int a_i, int a_neg_i) {
  if (done_) throw std::logic_error("step called on a finished episode");
  const int na = num_actions();
  if (a_i < 0 || a_i >= na || a_neg_i < 0 || a_neg_i >= na)
    throw std::out_of_range("action index out of range");

  double reward = 0.0;
  switch (cfg_.id) {
    case EnvId::RepeatedMatrix:
      reward = kMatrixPayoff[a_i][a_neg_i];
      break;
    case EnvId::CoopReach: {
      pos_[0] = apply_move(pos_[0], a_i);
      pos_[1] = apply_move(pos_[1], a_neg_i);
      if (pos_[0] == pos_[1] && corner_index(pos_[0]) >= 0) {
        reward = 1.0;
        done_ = true;
      }
      break;
    }
    case EnvId::WeightedCoopReach: {
      pos_[0] = apply_move(pos_[0], a_i);
      pos_[1] = apply_move(pos_[1], a_neg_i);
      const int ca = corner_index(pos_[0]);
      const int cb = corner_index(pos_[1]);
      if (ca >= 0 && cb >= 0) {
        reward = kWeightedCornerPayoff[ca][cb];
        done_ = true;
      }
      break;
    }
    case EnvId::LBF: {
      pos_[0] = apply_move(pos_[0], a_i);
      pos_[1] = apply_move(pos_[1], a_neg_i);
      if (a_i == kCollect && a_neg_i == kCollect) {
        for (size_t k = 0; k < items_.size(); ++k) {
          if (!item_alive_[k]) continue;
          if (manhattan(pos_[0], items_[k]) == 1 && manhattan(pos_[1], items_[k]) == 1) {
            item_alive_[k] = false;
            --items_left_;
            reward += 0.33;
          }
        }
      }
      if (items_left_ == 0) done_ = true;
      break;
    }
  }
  ++t_;
  if (t_ >= cfg_.horizon) done_ = true;

  StepResult r;
  r.obs = observe();
  r.reward = reward;
  r.done = done_;
  return r;
}

double EnvInstance::max_episode_return() const {
  switch (cfg_.id) {
    case EnvId::RepeatedMatrix: return 10.0 * cfg_.horizon;
    case EnvId::CoopReach: return 1.0;
    case EnvId::WeightedCoopReach: return 10.0;
    case EnvId::LBF: return 0.33 * cfg_.num_items;
  }
  return 0.0;
}

}  // namespace mcsforge
