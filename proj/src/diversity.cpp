#include "mcsforge/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mcsforge {

double ReturnMatrix::trace() const {
  double s = 0.0;
  for (int k = 0; k < K; ++k) s += at(k, k);
  return s;
}

std::string ReturnMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < K; ++i) {
    os << (i == 0 ? "" : ",") << "teammate_" << i;
  }
  os << "\n";
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) os << (i == 0 ? "" : ",") << at(j, i);
    os << "\n";
  }
  return os.str();
}

ReturnMatrix ReturnMatrix::from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_skipped = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  ReturnMatrix R(static_cast<int>(rows.size()));
  for (int j = 0; j < R.K; ++j) {
    if (static_cast<int>(rows[j].size()) != R.K)
      throw std::invalid_argument("return matrix CSV is not square");
    for (int i = 0; i < R.K; ++i) R.at(j, i) = rows[j][i];
  }
  return R;
}

LagrangeSet::LagrangeSet(int k, double tau_) : K(k), tau(tau_) {
  if (k < 1) throw std::invalid_argument("K must be positive");
  if (tau_ < 0.0) throw std::invalid_argument("tau must be nonnegative");
  alpha1.assign(static_cast<size_t>(k) * k, 0.0);
  alpha2.assign(static_cast<size_t>(k) * k, 0.0);
}

double LagrangeSet::max_multiplier() const {
  double mx = 0.0;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      if (i == j) continue;
      mx = std::max({mx, a1(i, j), a2(i, j)});
    }
  return mx;
}

std::string LagrangeSet::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind,i,j,value\n";
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      if (i == j) continue;
      os << "alpha1," << i << "," << j << "," << a1(i, j) << "\n";
    }
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      if (i == j) continue;
      os << "alpha2," << i << "," << j << "," << a2(i, j) << "\n";
    }
  return os.str();
}

double pair_weight(const LagrangeSet& A, int i, int j) {
  if (i < 0 || j < 0 || i >= A.K || j >= A.K)
    throw std::out_of_range("pair index out of range");
  if (i == j) {
    double s = 1.0;
    for (int k = 0; k < A.K; ++k) {
      if (k == j) continue;
      s += A.a1(i, k) + A.a2(i, k);
    }
    return s;
  }
  return -(A.a1(i, j) + A.a2(j, i));
}

double constraint_slack1(const ReturnMatrix& R, double tau, int i, int j) {
  return R.at(i, i) - tau - R.at(j, i);
}

double constraint_slack2(const ReturnMatrix& R, double tau, int i, int j) {
  return R.at(i, i) - tau - R.at(i, j);
}

double min_constraint_slack(const ReturnMatrix& R, double tau) {
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < R.K; ++i)
    for (int j = 0; j < R.K; ++j) {
      if (i == j) continue;
      mn = std::min({mn, constraint_slack1(R, tau, i, j), constraint_slack2(R, tau, i, j)});
    }
  return mn;
}

double lagrange_dual_value(const ReturnMatrix& R, const LagrangeSet& A) {
  if (R.K != A.K) throw std::invalid_argument("matrix/multiplier size mismatch");
  double v = R.trace();
  for (int i = 0; i < R.K; ++i)
    for (int j = 0; j < R.K; ++j) {
      if (i == j) continue;
      v += A.a1(i, j) * constraint_slack1(R, A.tau, i, j);
      v += A.a2(i, j) * constraint_slack2(R, A.tau, i, j);
    }
  return v;
}

LagrangeSet lagrange_update(const ReturnMatrix& R_hat, const LagrangeSet& A, double lr) {
  if (lr < 0.0) throw std::invalid_argument("learning rate must be nonnegative");
  if (R_hat.K != A.K) throw std::invalid_argument("matrix/multiplier size mismatch");
  LagrangeSet out = A;
  for (int i = 0; i < A.K; ++i)
    for (int j = 0; j < A.K; ++j) {
      if (i == j) continue;
      out.a1(i, j) = std::max(0.0, A.a1(i, j) - lr * constraint_slack1(R_hat, A.tau, i, j));
      out.a2(i, j) = std::max(0.0, A.a2(i, j) - lr * constraint_slack2(R_hat, A.tau, i, j));
    }
  return out;
}

double brdiv_objective(const ReturnMatrix& R, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  // factored accumulation: the diversity sum is exact for integer-valued
  // matrices, so the result carries a single rounding from the alpha scale
  double s = 0.0;
  for (int i = 0; i < R.K; ++i)
    for (int j = 0; j < R.K; ++j) {
      if (i == j) continue;
      s += (R.at(i, i) - R.at(j, i)) + (R.at(i, i) - R.at(i, j));
    }
  return R.trace() + alpha * s;
}

double lipo_objective(const ReturnMatrix& R, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  // each off-diagonal entry penalized once (unordered-pair convention)
  double s = 0.0;
  for (int i = 0; i < R.K; ++i)
    for (int j = i + 1; j < R.K; ++j) s += R.at(j, i) + R.at(i, j);
  return R.trace() - alpha * s;
}

}  // namespace mcsforge
