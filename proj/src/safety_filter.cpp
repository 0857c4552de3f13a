#include "safeadapt/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace safeadapt {

namespace {

std::string describe(const std::vector<int>& idx) {
  std::ostringstream os;
  os << "infeasible safety filter; violated constraints:";
  for (int i : idx) os << ' ' << i;
  return os.str();
}

bool primal_ok(const std::vector<LinearConstraint>& cs, const Vec& r) {
  for (const auto& c : cs) {
    if (c.a.dot(r) < c.b - tol::kFeasibility * std::max(1.0, std::abs(c.b))) return false;
  }
  return true;
}

// Solves min |r - r*| s.t. a_i^T r = b_i for i in subset. Returns false when
// the subset rows are rank deficient or a multiplier is negative.
bool solve_subset(const std::vector<LinearConstraint>& cs, const std::vector<int>& subset, const Vec& r_star,
                  Vec& r, Vec& lam) {
  const auto k = static_cast<Eigen::Index>(subset.size());
  const auto q = r_star.size();
  Mat a(k, q);
  Vec rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& c = cs[static_cast<std::size_t>(subset[static_cast<std::size_t>(i)])];
    a.row(i) = c.a.transpose();
    rhs(i) = c.b - c.a.dot(r_star);
  }
  const Mat g = a * a.transpose();
  Eigen::FullPivLU<Mat> lu(g);
  if (lu.rank() < k) return false;
  lam = lu.solve(rhs);
  const double scale = std::max(1.0, lam.lpNorm<Eigen::Infinity>());
  if ((lam.array() < -tol::kKkt * scale).any()) return false;
  lam = lam.cwiseMax(0.0);
  r = r_star + a.transpose() * lam;
  return true;
}

// Next size-k combination of {0..n-1} in lexicographic order.
bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

InfeasibleFilter::InfeasibleFilter(std::vector<int> violated)
    : std::runtime_error(describe(violated)), violated_(std::move(violated)) {}

LinearConstraint orm_constraint(const BarrierSpec& bar, const Vec& x_m, const Mat& A_m, const Mat& B_m,
                                double gamma, double Delta) {
  const Vec g = bar.grad(x_m);
  return LinearConstraint{B_m.transpose() * g, -gamma * bar.h(x_m) + Delta - g.dot(A_m * x_m)};
}

LinearConstraint ccrm_constraint(const BarrierSpec& bar, const Vec& x_m, const Mat& A_m, const Mat& B_m,
                                 const Mat& L, const Mat& B_p, const Mat& Lambda_hat, const Vec& e_x_sat,
                                 const Vec& du_sat, double gamma, double Delta) {
  const Vec g = bar.grad(x_m);
  const Vec drift = A_m * x_m + L * e_x_sat + B_p * (Lambda_hat * du_sat);
  return LinearConstraint{B_m.transpose() * g, -gamma * bar.h(x_m) + Delta - g.dot(drift)};
}

FilterResult solve_cbf_qp(const std::vector<LinearConstraint>& constraints, const Vec& r_star) {
  const int n = static_cast<int>(constraints.size());
  if (n > 16) throw std::invalid_argument("solve_cbf_qp: at most 16 constraints supported");
  for (const auto& c : constraints) {
    if (c.a.size() != r_star.size()) throw std::invalid_argument("solve_cbf_qp: dimension mismatch");
  }

  FilterResult res;
  res.lambdas = Vec::Zero(n);
  if (primal_ok(constraints, r_star)) {
    res.r_s = r_star;
    res.kkt_residual = kkt_verify(res, constraints, r_star);
    return res;
  }

  Vec r;
  Vec lam;
  for (int k = 1; k <= n; ++k) {
    std::vector<int> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), 0);
    do {
      if (!solve_subset(constraints, subset, r_star, r, lam)) continue;
      if (!primal_ok(constraints, r)) continue;
      res.r_s = r;
      for (int i = 0; i < k; ++i) res.lambdas(subset[static_cast<std::size_t>(i)]) = lam(i);
      for (int i = 0; i < k; ++i) {
        if (lam(i) > 0.0) res.active_set.push_back(subset[static_cast<std::size_t>(i)]);
      }
      res.kkt_residual = kkt_verify(res, constraints, r_star);
      return res;
    } while (next_combination(subset, n));
  }

  std::vector<int> violated;
  for (int i = 0; i < n; ++i) {
    const auto& c = constraints[static_cast<std::size_t>(i)];
    if (c.a.dot(r_star) < c.b) violated.push_back(i);
  }
  throw InfeasibleFilter(violated);
}

double kkt_verify(const FilterResult& res, const std::vector<LinearConstraint>& constraints, const Vec& r_star) {
  Vec stat = res.r_s - r_star;
  double worst = 0.0;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    const double li = res.lambdas(static_cast<Eigen::Index>(i));
    const double slack = c.b - c.a.dot(res.r_s);
    stat -= li * c.a;
    worst = std::max(worst, std::abs(li * slack));
    worst = std::max(worst, std::max(0.0, slack));
    worst = std::max(worst, std::max(0.0, -li));
  }
  return std::max(worst, stat.lpNorm<Eigen::Infinity>());
}

bool clamp_reference(Vec& r, double r_max) {
  const double norm = r.norm();
  if (!(norm > r_max)) return false;
  r *= r_max / norm;
  return true;
}

}  // namespace safeadapt
