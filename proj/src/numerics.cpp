#include "safeadapt/numerics.hpp"

#include <cmath>
#include <sstream>

namespace safeadapt {

double max_real_eigenvalue(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Mat& a) {
  return a.rows() == a.cols() && max_real_eigenvalue(a) < 0.0;
}

Mat solve_lyapunov(const Mat& a, const Mat& q) {
  const auto n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw NumericsError("solve_lyapunov: dimension mismatch");
  }
  if (!is_hurwitz(a)) {
    std::ostringstream os;
    os << "unstable matrix: max Re(eig) = " << max_real_eigenvalue(a);
    throw NumericsError(os.str());
  }
  if ((q - q.transpose()).norm() > tol::kSymmetry * std::max(1.0, q.norm())) {
    throw NumericsError("solve_lyapunov: Q not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> qeig(q);
  if (qeig.eigenvalues().minCoeff() <= 0.0) {
    throw NumericsError("solve_lyapunov: Q not positive definite");
  }

  // Column-major vec: vec(A^T P) = (I kron A^T) vec(P), vec(P A) = (A^T kron I) vec(P).
  const Mat id = Mat::Identity(n, n);
  const Mat at = a.transpose();
  Mat k = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += id(i, j) * at;
      k.block(i * n, j * n, n, n) += at(i, j) * id;
    }
  }
  const Mat mq = -q;
  const Vec rhs = Eigen::Map<const Vec>(mq.data(), n * n);
  const Vec sol = k.fullPivLu().solve(rhs);
  Mat p = Eigen::Map<const Mat>(sol.data(), n, n);
  p = 0.5 * (p + p.transpose());
  return p;
}

Mat pinv(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) {
    return Mat::Zero(m.cols(), m.rows());
  }
  const double cutoff =
      static_cast<double>(std::max(m.rows(), m.cols())) * s(0) * Eigen::NumTraits<double>::epsilon();
  Vec sinv = Vec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) sinv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * sinv.asDiagonal() * svd.matrixU().transpose();
}

Vec rk4_step(const Derivative& f, double t, const Vec& x, double dt) {
  if (!(dt > 0.0)) throw NumericsError("rk4_step: dt must be positive");
  auto eval = [&](double ts, const Vec& xs) {
    Vec d = f(ts, xs);
    if (!d.allFinite()) {
      std::ostringstream os;
      os << "numerical blow-up at t = " << ts;
      throw NumericalBlowup(ts, os.str());
    }
    return d;
  };
  const double h2 = 0.5 * dt;
  const Vec k1 = eval(t, x);
  const Vec k2 = eval(t + h2, x + h2 * k1);
  const Vec k3 = eval(t + h2, x + h2 * k2);
  const Vec k4 = eval(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace safeadapt
