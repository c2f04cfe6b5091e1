#pragma once

#include <string>
#include <vector>

namespace mcsforge {

// K x K matrix of expected cross-play returns. values[j][i] is the return
// of AHT-side policy j paired with teammate i; the diagonal is self-play.
struct ReturnMatrix {
  int K = 0;
  std::vector<double> values;  // row-major

  ReturnMatrix() = default;
  explicit ReturnMatrix(int k) : K(k), values(static_cast<size_t>(k) * k, 0.0) {}
  double& at(int j, int i) { return values[static_cast<size_t>(j) * K + i]; }
  double at(int j, int i) const { return values[static_cast<size_t>(j) * K + i]; }
  double trace() const;

  std::string to_csv() const;
  static ReturnMatrix from_csv(const std::string& csv);
};

// Nonnegative multipliers for the dual, one pair (alpha1, alpha2) per
// ordered policy pair i != j. Diagonals are stored but never read.
struct LagrangeSet {
  int K = 0;
  double tau = 0.0;
  std::vector<double> alpha1;  // K x K row-major, [i][j]
  std::vector<double> alpha2;

  LagrangeSet() = default;
  LagrangeSet(int k, double tau_);
  double& a1(int i, int j) { return alpha1[static_cast<size_t>(i) * K + j]; }
  double a1(int i, int j) const { return alpha1[static_cast<size_t>(i) * K + j]; }
  double& a2(int i, int j) { return alpha2[static_cast<size_t>(i) * K + j]; }
  double a2(int i, int j) const { return alpha2[static_cast<size_t>(i) * K + j]; }
  double max_multiplier() const;

  std::string to_csv() const;
};

// Advantage weight for the pair (i, j): 1 + sum_{k!=j}(a1[i][k] + a2[i][k])
// on the diagonal, -(a1[i][j] + a2[j][i]) off it. Indices are 0-based.
double pair_weight(const LagrangeSet& A, int i, int j);

// Dual objective value: trace + sum of multiplier-weighted constraint slacks.
double lagrange_dual_value(const ReturnMatrix& R, const LagrangeSet& A);

// Projected gradient step on the dual; slack-violating multipliers grow,
// satisfied ones shrink and clamp at zero.
LagrangeSet lagrange_update(const ReturnMatrix& R_hat, const LagrangeSet& A, double lr);

// constraint slacks R[i][i] - tau - R[j][i] (slack1) and - R[i][j] (slack2)
double constraint_slack1(const ReturnMatrix& R, double tau, int i, int j);
double constraint_slack2(const ReturnMatrix& R, double tau, int i, int j);
double min_constraint_slack(const ReturnMatrix& R, double tau);

// Fixed-weight adversarial diversity objectives over a return matrix.
// BRDiv counts each cross-play term per ordered pair; LIPO penalizes each
// off-diagonal entry once.
double brdiv_objective(const ReturnMatrix& R, double alpha);
double lipo_objective(const ReturnMatrix& R, double alpha);

}  // namespace mcsforge
