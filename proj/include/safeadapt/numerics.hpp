#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace safeadapt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace tol {
inline constexpr double kLinearResidual = 1e-9;
inline constexpr double kSymmetry = 1e-12;
inline constexpr double kMatching = 1e-8;
inline constexpr double kKkt = 1e-8;
inline constexpr double kFeasibility = 1e-9;
}  // namespace tol

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an integrator stage produces a non-finite derivative.
class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(double t, const std::string& what)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

bool is_hurwitz(const Mat& a);
double max_real_eigenvalue(const Mat& a);

/// Solves A^T P + P A = -Q by Kronecker vectorization.
/// Requires A Hurwitz and Q symmetric positive definite.
Mat solve_lyapunov(const Mat& a, const Mat& q);

/// Moore-Penrose pseudoinverse via SVD.
Mat pinv(const Mat& m);

using Derivative = std::function<Vec(double, const Vec&)>;

/// One classical fourth-order Runge-Kutta step.
Vec rk4_step(const Derivative& f, double t, const Vec& x, double dt);

/// Induced 2-norm (largest singular value).
double spectral_norm(const Mat& m);

bool all_finite(const Mat& m);

}  // namespace safeadapt
