#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcsforge/diversity.hpp"
#include "mcsforge/env.hpp"
#include "mcsforge/heuristics.hpp"

namespace mcsforge {

// A finite, enumerable universe of deterministic scripted policies used as
// ground truth. Policies are referenced by heuristic id (see heuristics.hpp).
struct PolicyUniverse {
  EnvConfig env;
  std::vector<int> heuristic_ids;
  std::vector<std::string> names;

  int size() const { return static_cast<int>(heuristic_ids.size()); }

  // 3 constant-action policies; best responses to any mixed teammate are
  // constant, so nothing is lost by the restriction
  static PolicyUniverse matrix_universe(int horizon = 5);
  // the 4 corner-seeking policies (greedy shortest path, wait on arrival)
  static PolicyUniverse reaching_corner_universe(EnvId id, int grid_dim = 7,
                                                 int horizon = 50);
  // the 6 item-order permutations; optionally plus nearest/farthest chasers
  static PolicyUniverse lbf_universe(bool include_greedy = false, int grid_dim = 8,
                                     int horizon = 50);
};

// Expected undiscounted episodic return for every (row policy, column
// policy) pairing. Deterministic start states are enumerated exhaustively
// when feasible, otherwise `episodes_per_cell` seeded starts are averaged.
// For the matrix game the result is normalized to per-step payoff (exact).
ReturnMatrix exact_return_matrix(const PolicyUniverse& universe, int episodes_per_cell = 256);

bool is_coverage_set(const std::vector<int>& candidate, const ReturnMatrix& R,
                     double tol = 1e-9);

// all coverage sets minimal under single removal, sorted by size then
// lexicographically; throws on universes larger than 20 policies
std::vector<std::vector<int>> minimal_coverage_sets(const ReturnMatrix& R,
                                                    double tol = 1e-9);

struct FeasibilityResult {
  bool feasible = false;
  std::optional<int> witness;  // teammate column attaining the best response
};

FeasibilityResult feasibility_check(int candidate_row, const ReturnMatrix& R,
                                    double tol = 1e-9);

struct CoverageReport {
  PolicyUniverse universe;
  ReturnMatrix matrix;
  double tol = 1e-9;
  std::vector<std::vector<int>> minimal_sets;
  std::vector<int> best_response_row;      // per teammate column
  std::vector<double> best_response_value;
  std::vector<FeasibilityResult> feasibility;  // per row

  std::string to_text() const;
  std::string to_csv() const;  // one row per candidate set (minimal sets + full universe)
};

CoverageReport analyze_universe(const PolicyUniverse& universe, int episodes_per_cell = 256,
                                double tol = 1e-9);

}  // namespace mcsforge
