#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include "safeadapt/numerics.hpp"

namespace safeadapt {

/// LTI plant x_p' = A_p x_p + B_p Lambda R_u0(u). A_p and Lambda are unknown
/// to the controller; B_p is known.
struct UncertainPlant {
  Mat A_p;
  Mat B_p;
  Mat Lambda;
  double u0 = std::numeric_limits<double>::infinity();

  Eigen::Index n() const { return A_p.rows(); }
  Eigen::Index m() const { return B_p.cols(); }

  /// Throws std::invalid_argument on inconsistent dimensions, a non-diagonal
  /// or non-positive Lambda, or u0 <= 0.
  void validate() const;
};

/// Matched parameters: A_p + B_p Lambda theta_x* = A_m, B_p Lambda theta_r* = B_m.
struct IdealGains {
  Mat theta_x_star;
  Mat theta_r_star;
};

class MatchingError : public std::runtime_error {
 public:
  MatchingError(double residual_x, double residual_r);
  double residual_x() const { return residual_x_; }
  double residual_r() const { return residual_r_; }

 private:
  double residual_x_;
  double residual_r_;
};

/// Radial magnitude limit: u if |u| <= u0, otherwise u0 u / |u|.
Vec saturate(const Vec& u, double u0);

Vec plant_derivative(const UncertainPlant& p, const Vec& x_p, const Vec& u);

IdealGains ideal_gains(const UncertainPlant& p, const Mat& A_m, const Mat& B_m);

}  // namespace safeadapt
