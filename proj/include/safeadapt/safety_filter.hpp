#pragma once

#include <stdexcept>
#include <vector>

#include "safeadapt/barrier.hpp"
#include "safeadapt/numerics.hpp"

namespace safeadapt {

/// Row a^T r >= b.
struct LinearConstraint {
  Vec a;
  double b = 0.0;
};

struct FilterResult {
  Vec r_s;
  Vec lambdas;
  std::vector<int> active_set;
  double kkt_residual = 0.0;
};

class InfeasibleFilter : public std::runtime_error {
 public:
  explicit InfeasibleFilter(std::vector<int> violated);
  const std::vector<int>& violated() const { return violated_; }

 private:
  std::vector<int> violated_;
};

LinearConstraint orm_constraint(const BarrierSpec& bar, const Vec& x_m, const Mat& A_m, const Mat& B_m,
                                double gamma, double Delta);

/// e_x_sat and du_sat are expected to be clamped by the caller.
LinearConstraint ccrm_constraint(const BarrierSpec& bar, const Vec& x_m, const Mat& A_m, const Mat& B_m,
                                 const Mat& L, const Mat& B_p, const Mat& Lambda_hat, const Vec& e_x_sat,
                                 const Vec& du_sat, double gamma, double Delta);

/// Projects r_star onto {r : a_i^T r >= b_i}. Active sets are enumerated by
/// size, then lexicographically; the first KKT point found is returned.
/// Throws InfeasibleFilter when no subset yields a feasible point.
FilterResult solve_cbf_qp(const std::vector<LinearConstraint>& constraints, const Vec& r_star);

/// Max absolute violation of stationarity, complementarity and primal/dual feasibility.
double kkt_verify(const FilterResult& res, const std::vector<LinearConstraint>& constraints, const Vec& r_star);

/// Clamps r onto the ball of radius r_max. Returns true if clamping occurred.
bool clamp_reference(Vec& r, double r_max);

}  // namespace safeadapt
