#pragma once

#include <functional>
#include <string>

#include "safeadapt/numerics.hpp"

namespace safeadapt {

struct ReferenceModelSpec {
  Mat A_m;
  Mat B_m;
  Mat L;  // zero for the open-loop model
  double e0 = 1.0;
  double du0 = 1.0;

  /// Throws std::invalid_argument with an eigenvalue report if A_m (or
  /// A_m - L when closed_loop) is not Hurwitz, or B_m lacks full column rank.
  void validate(bool closed_loop) const;
};

enum class TrajectoryKind { kConstant, kStep, kSmoothedStep };

struct DesiredTrajectory {
  TrajectoryKind kind = TrajectoryKind::kConstant;
  std::function<Vec(double)> x_d;
  std::function<Vec(double)> x_d_dot;
};

DesiredTrajectory constant_setpoint(const Vec& target);
/// Jumps from 0 to target at t_step; derivative taken as zero.
DesiredTrajectory step_command(const Vec& target, double t_step = 0.0);
/// target * (1 - exp(-t / tau)).
DesiredTrajectory smoothed_step(const Vec& target, double tau);

/// r* = B_m^+ (x_d' - A_m x_d)
Vec nominal_reference(const ReferenceModelSpec& spec, const DesiredTrajectory& traj, double t);

Vec orm_derivative(const ReferenceModelSpec& spec, const Vec& x_m, const Vec& r_s);

/// Uses the raw e_x and du; clamped versions appear only in the filter row.
Vec ccrm_derivative(const ReferenceModelSpec& spec, const Vec& x_m, const Vec& r_s, const Vec& e_x, const Mat& B_p,
                    const Mat& lambda_hat, const Vec& du);

Vec clamp_vec(const Vec& v, double limit);

}  // namespace safeadapt
