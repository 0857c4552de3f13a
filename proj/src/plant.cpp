#include "safeadapt/plant.hpp"

#include <cmath>
#include <sstream>

namespace safeadapt {

void UncertainPlant::validate() const {
  const auto nn = A_p.rows();
  if (nn < 1 || A_p.cols() != nn) throw std::invalid_argument("plant: A_p must be square");
  if (B_p.rows() != nn || B_p.cols() < 1) throw std::invalid_argument("plant: B_p must be n x m");
  const auto mm = B_p.cols();
  if (Lambda.rows() != mm || Lambda.cols() != mm) {
    throw std::invalid_argument("plant: Lambda must be m x m");
  }
  for (Eigen::Index i = 0; i < mm; ++i) {
    for (Eigen::Index j = 0; j < mm; ++j) {
      if (i != j && Lambda(i, j) != 0.0) throw std::invalid_argument("plant: Lambda must be diagonal");
    }
    if (!(Lambda(i, i) > 0.0)) throw std::invalid_argument("plant: Lambda entries must be positive");
  }
  if (!(u0 > 0.0)) throw std::invalid_argument("plant: u0 must be positive");
  if (!A_p.allFinite() || !B_p.allFinite()) throw std::invalid_argument("plant: non-finite entries");
}

MatchingError::MatchingError(double residual_x, double residual_r)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "matching condition violated: |A_p + B_p Lambda theta_x* - A_m| = " << residual_x
           << ", |B_p Lambda theta_r* - B_m| = " << residual_r;
        return os.str();
      }()),
      residual_x_(residual_x),
      residual_r_(residual_r) {}

Vec saturate(const Vec& u, double u0) {
  const double norm = u.norm();
  if (norm <= u0) return u;
  return (u0 / norm) * u;
}

Vec plant_derivative(const UncertainPlant& p, const Vec& x_p, const Vec& u) {
  if (x_p.size() != p.n() || u.size() != p.m()) {
    throw std::invalid_argument("plant_derivative: dimension mismatch");
  }
  return p.A_p * x_p + p.B_p * (p.Lambda * saturate(u, p.u0));
}

IdealGains ideal_gains(const UncertainPlant& p, const Mat& A_m, const Mat& B_m) {
  if (A_m.rows() != p.n() || A_m.cols() != p.n() || B_m.rows() != p.n()) {
    throw std::invalid_argument("ideal_gains: dimension mismatch");
  }
  const Mat b = p.B_p * p.Lambda;
  const Mat b_pinv = pinv(b);
  IdealGains g{b_pinv * (A_m - p.A_p), b_pinv * B_m};
  const double rx = (p.A_p + b * g.theta_x_star - A_m).norm();
  const double rr = (b * g.theta_r_star - B_m).norm();
  const double scale_x = std::max(1.0, A_m.norm());
  const double scale_r = std::max(1.0, B_m.norm());
  if (rx > tol::kMatching * scale_x || rr > tol::kMatching * scale_r) {
    throw MatchingError(rx, rr);
  }
  return g;
}

}  // namespace safeadapt
