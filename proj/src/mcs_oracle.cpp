#include "mcsforge/mcs_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mcsforge {

PolicyUniverse PolicyUniverse::matrix_universe(int horizon) {
  PolicyUniverse u;
  u.env = default_env_config(EnvId::RepeatedMatrix);
  u.env.horizon = horizon;
  u.heuristic_ids = {1, 2, 3};
  u.names = {"a1", "a2", "a3"};
  return u;
}

PolicyUniverse PolicyUniverse::reaching_corner_universe(EnvId id, int grid_dim, int horizon) {
  if (id != EnvId::CoopReach && id != EnvId::WeightedCoopReach)
    throw std::invalid_argument("corner universe needs a reaching environment");
  PolicyUniverse u;
  u.env = default_env_config(id);
  u.env.grid_dim = grid_dim;
  u.env.horizon = horizon;
  u.heuristic_ids = {8, 9, 10, 11};  // fixed corners A..D
  u.names = {"corner_A", "corner_B", "corner_C", "corner_D"};
  return u;
}

PolicyUniverse PolicyUniverse::lbf_universe(bool include_greedy, int grid_dim, int horizon) {
  PolicyUniverse u;
  u.env = default_env_config(EnvId::LBF);
  u.env.grid_dim = grid_dim;
  u.env.horizon = horizon;
  if (include_greedy) {
    u.heuristic_ids = {1, 2};
    u.names = {"nearest", "farthest"};
  }
  for (int k = 0; k < 6; ++k) {
    u.heuristic_ids.push_back(3 + k);
    u.names.push_back("perm_" + std::to_string(k));
  }
  return u;
}

namespace {

double rollout_return(EnvInstance& env, HeuristicTeammate& pa, HeuristicTeammate& pb) {
  pa.begin_episode(env, 0);
  pb.begin_episode(env, 1);
  double ret = 0.0;
  while (!env.done()) {
    const int a = pa.act(env, 0);
    const int b = pb.act(env, 1);
    ret += env.step(a, b).reward;
  }
  return ret;
}

std::vector<Cell> spawnable_cells(const EnvInstance& env) {
  std::vector<Cell> out;
  const int g = env.config().grid_dim;
  for (int y = 0; y < g; ++y)
    for (int x = 0; x < g; ++x) {
      Cell c{x, y};
      if (env.corner_index(c) >= 0) continue;
      bool on_item = false;
      for (size_t k = 0; k < env.item_cells().size(); ++k)
        if (env.item_cells()[k] == c) on_item = true;
      if (!on_item) out.push_back(c);
    }
  return out;
}

}  // namespace

ReturnMatrix exact_return_matrix(const PolicyUniverse& universe, int episodes_per_cell) {
  const int n = universe.size();
  ReturnMatrix R(n);
  const EnvConfig& cfg = universe.env;

  if (cfg.id == EnvId::RepeatedMatrix) {
    // single trivial state; one rollout, normalized to per-step payoff
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        EnvInstance env(cfg);
        env.reset(0);
        HeuristicTeammate pa(cfg.id, universe.heuristic_ids[j], 1);
        HeuristicTeammate pb(cfg.id, universe.heuristic_ids[i], 2);
        R.at(j, i) = rollout_return(env, pa, pb) / cfg.horizon;
      }
    return R;
  }

  if (cfg.id == EnvId::LBF) {
    // item layouts and spawns vary; average over shared seeded starts
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int e = 0; e < episodes_per_cell; ++e) {
          EnvInstance env(cfg);
          env.reset(static_cast<uint64_t>(e) + 1);
          HeuristicTeammate pa(cfg.id, universe.heuristic_ids[j], 100 + e);
          HeuristicTeammate pb(cfg.id, universe.heuristic_ids[i], 200 + e);
          total += rollout_return(env, pa, pb);
        }
        R.at(j, i) = total / episodes_per_cell;
      }
    return R;
  }

  // reaching: deterministic given start positions; enumerate exhaustively
  // when the joint start grid is small enough
  EnvInstance probe(cfg);
  probe.reset(0);
  const auto cells = spawnable_cells(probe);
  const size_t joint = cells.size() * cells.size();
  std::vector<std::pair<Cell, Cell>> starts;
  if (joint <= 4096) {
    for (const Cell& a : cells)
      for (const Cell& b : cells) starts.emplace_back(a, b);
  } else {
    Rng rng(12345);
    for (int e = 0; e < episodes_per_cell; ++e)
      starts.emplace_back(cells[rng.uniform_int(static_cast<int>(cells.size()))],
                          cells[rng.uniform_int(static_cast<int>(cells.size()))]);
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (const auto& [a, b] : starts) {
        EnvInstance env(cfg);
        env.reset(0);
        env.reset_with_positions(a, b);
        HeuristicTeammate pa(cfg.id, universe.heuristic_ids[j], 1);
        HeuristicTeammate pb(cfg.id, universe.heuristic_ids[i], 2);
        total += rollout_return(env, pa, pb);
      }
      R.at(j, i) = total / static_cast<double>(starts.size());
    }
  return R;
}

namespace {

// bitmask of rows attaining each column's maximum within tol
std::vector<uint32_t> column_best_masks(const ReturnMatrix& R, double tol) {
  std::vector<uint32_t> best(R.K, 0);
  for (int c = 0; c < R.K; ++c) {
    double mx = R.at(0, c);
    for (int r = 1; r < R.K; ++r) mx = std::max(mx, R.at(r, c));
    for (int r = 0; r < R.K; ++r)
      if (R.at(r, c) >= mx - tol) best[c] |= (1u << r);
  }
  return best;
}

}  // namespace

bool is_coverage_set(const std::vector<int>& candidate, const ReturnMatrix& R, double tol) {
  if (R.K == 0) return true;
  if (candidate.empty()) return false;
  uint32_t mask = 0;
  for (int r : candidate) {
    if (r < 0 || r >= R.K) throw std::out_of_range("candidate index out of range");
    mask |= (1u << r);
  }
  for (uint32_t best : column_best_masks(R, tol))
    if ((mask & best) == 0) return false;
  return true;
}

std::vector<std::vector<int>> minimal_coverage_sets(const ReturnMatrix& R, double tol) {
  const int n = R.K;
  if (n > 20) throw std::invalid_argument("universe too large for exhaustive subset scan");
  const auto best = column_best_masks(R, tol);
  std::vector<std::vector<int>> out;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool covers = true;
    for (uint32_t b : best)
      if ((mask & b) == 0) {
        covers = false;
        break;
      }
    if (!covers) continue;
    // minimal iff every member is the sole covering row of some column
    bool minimal = true;
    for (int r = 0; r < n && minimal; ++r) {
      if (!(mask & (1u << r))) continue;
      bool needed = false;
      for (uint32_t b : best)
        if ((mask & b) == (1u << r) && (b & (1u << r))) {
          needed = true;
          break;
        }
      if (!needed) minimal = false;
    }
    if (!minimal) continue;
    std::vector<int> set;
    for (int r = 0; r < n; ++r)
      if (mask & (1u << r)) set.push_back(r);
    out.push_back(std::move(set));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

FeasibilityResult feasibility_check(int candidate_row, const ReturnMatrix& R, double tol) {
  if (candidate_row < 0 || candidate_row >= R.K)
    throw std::out_of_range("candidate row out of range");
  if (R.K == 1) return {true, 0};
  for (int c = 0; c < R.K; ++c) {
    bool dominates = true;
    for (int r = 0; r < R.K; ++r)
      if (R.at(candidate_row, c) < R.at(r, c) - tol) {
        dominates = false;
        break;
      }
    if (dominates) return {true, c};
  }
  return {false, std::nullopt};
}

CoverageReport analyze_universe(const PolicyUniverse& universe, int episodes_per_cell,
                                double tol) {
  CoverageReport rep;
  rep.universe = universe;
  rep.tol = tol;
  rep.matrix = exact_return_matrix(universe, episodes_per_cell);
  rep.minimal_sets = minimal_coverage_sets(rep.matrix, tol);
  const int n = universe.size();
  for (int c = 0; c < n; ++c) {
    int arg = 0;
    for (int r = 1; r < n; ++r)
      if (rep.matrix.at(r, c) > rep.matrix.at(arg, c)) arg = r;
    rep.best_response_row.push_back(arg);
    rep.best_response_value.push_back(rep.matrix.at(arg, c));
  }
  for (int r = 0; r < n; ++r) rep.feasibility.push_back(feasibility_check(r, rep.matrix, tol));
  return rep;
}

std::string CoverageReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "environment: " << env_id_to_string(universe.env.id) << "\n";
  os << "universe (" << universe.size() << " policies):";
  for (const auto& n : universe.names) os << " " << n;
  os << "\nreturn matrix (rows = candidate best-response policy, cols = teammate):\n";
  for (int j = 0; j < matrix.K; ++j) {
    os << "  " << universe.names[j] << ":";
    for (int i = 0; i < matrix.K; ++i) os << " " << matrix.at(j, i);
    os << "\n";
  }
  os << "per-teammate best responses:\n";
  for (int c = 0; c < matrix.K; ++c)
    os << "  vs " << universe.names[c] << ": " << universe.names[best_response_row[c]]
       << " (" << best_response_value[c] << ")\n";
  os << "feasibility (is some teammate's best response):\n";
  for (int r = 0; r < matrix.K; ++r) {
    os << "  " << universe.names[r] << ": " << (feasibility[r].feasible ? "yes" : "no");
    if (feasibility[r].witness) os << " (witness " << universe.names[*feasibility[r].witness] << ")";
    os << "\n";
  }
  os << "minimal coverage sets (" << minimal_sets.size() << "):\n";
  for (const auto& s : minimal_sets) {
    os << "  {";
    for (size_t k = 0; k < s.size(); ++k) os << (k ? ", " : "") << universe.names[s[k]];
    os << "}\n";
  }
  return os.str();
}

std::string CoverageReport::to_csv() const {
  std::ostringstream os;
  os << "candidate_set,size,is_coverage,is_minimal\n";
  auto emit = [&](const std::vector<int>& s, bool minimal) {
    os << "\"";
    for (size_t k = 0; k < s.size(); ++k) os << (k ? ";" : "") << universe.names[s[k]];
    os << "\"," << s.size() << "," << (is_coverage_set(s, matrix, tol) ? 1 : 0) << ","
       << (minimal ? 1 : 0) << "\n";
  };
  for (const auto& s : minimal_sets) emit(s, true);
  std::vector<int> full(matrix.K);
  for (int r = 0; r < matrix.K; ++r) full[r] = r;
  bool full_is_minimal = false;
  for (const auto& s : minimal_sets)
    if (s == full) full_is_minimal = true;
  if (!full_is_minimal) emit(full, false);
  return os.str();
}

}  // namespace mcsforge
