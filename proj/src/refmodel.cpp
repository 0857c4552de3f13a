#include "safeadapt/refmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safeadapt/plant.hpp"

namespace safeadapt {

namespace {

std::string eig_report(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  std::ostringstream os;
  os << "eigenvalues:";
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto z = es.eigenvalues()(i);
    os << ' ' << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << 'i';
  }
  return os.str();
}

}  // namespace

void ReferenceModelSpec::validate(bool closed_loop) const {
  const auto n = A_m.rows();
  if (n < 1 || A_m.cols() != n) throw std::invalid_argument("refmodel: A_m must be square");
  if (B_m.rows() != n || B_m.cols() < 1) throw std::invalid_argument("refmodel: B_m must be n x q");
  if (L.rows() != n || L.cols() != n) throw std::invalid_argument("refmodel: L must be n x n");
  if (!is_hurwitz(A_m)) throw std::invalid_argument("refmodel: A_m is not Hurwitz; " + eig_report(A_m));
  if (closed_loop && !is_hurwitz(A_m - L)) {
    throw std::invalid_argument("refmodel: A_m - L is not Hurwitz; " + eig_report(A_m - L));
  }
  Eigen::FullPivLU<Mat> lu(B_m);
  if (lu.rank() < B_m.cols()) throw std::invalid_argument("refmodel: B_m must have full column rank");
  if (!(e0 > 0.0) || !(du0 > 0.0)) throw std::invalid_argument("refmodel: e0 and du0 must be positive");
}

DesiredTrajectory constant_setpoint(const Vec& target) {
  DesiredTrajectory d;
  d.kind = TrajectoryKind::kConstant;
  d.x_d = [target](double) { return target; };
  d.x_d_dot = [target](double) { return Vec::Zero(target.size()).eval(); };
  return d;
}

DesiredTrajectory step_command(const Vec& target, double t_step) {
  DesiredTrajectory d;
  d.kind = TrajectoryKind::kStep;
  d.x_d = [target, t_step](double t) { return t >= t_step ? target : Vec::Zero(target.size()).eval(); };
  d.x_d_dot = [target](double) { return Vec::Zero(target.size()).eval(); };
  return d;
}

DesiredTrajectory smoothed_step(const Vec& target, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("smoothed_step: tau must be positive");
  DesiredTrajectory d;
  d.kind = TrajectoryKind::kSmoothedStep;
  d.x_d = [target, tau](double t) { return (target * (1.0 - std::exp(-t / tau))).eval(); };
  d.x_d_dot = [target, tau](double t) { return (target * (std::exp(-t / tau) / tau)).eval(); };
  return d;
}

Vec nominal_reference(const ReferenceModelSpec& spec, const DesiredTrajectory& traj, double t) {
  return pinv(spec.B_m) * (traj.x_d_dot(t) - spec.A_m * traj.x_d(t));
}

Vec orm_derivative(const ReferenceModelSpec& spec, const Vec& x_m, const Vec& r_s) {
  return spec.A_m * x_m + spec.B_m * r_s;
}

Vec ccrm_derivative(const ReferenceModelSpec& spec, const Vec& x_m, const Vec& r_s, const Vec& e_x, const Mat& B_p,
                    const Mat& lambda_hat, const Vec& du) {
  return spec.A_m * x_m + spec.B_m * r_s + spec.L * e_x + B_p * (lambda_hat * du);
}

Vec clamp_vec(const Vec& v, double limit) { return saturate(v, limit); }

}  // namespace safeadapt
