#pragma once

#include "safeadapt/numerics.hpp"
#include "safeadapt/plant.hpp"

namespace safeadapt {

/// Controller estimates and adaptation gains. theta_r_hat is m x q where q is
/// the reference dimension (columns of B_m).
struct AdaptiveState {
  Mat theta_x_hat;
  Mat theta_r_hat;
  Mat lambda_hat;
  Mat Gamma_x;
  Mat Gamma_r;
  Mat Gamma_lambda;
  Mat P;
};

struct AdaptationRates {
  Mat dtheta_x;
  Mat dtheta_r;
  Mat dlambda_hat;
};

/// u = theta_x_hat x_p + theta_r_hat r_s, before saturation.
Vec control(const AdaptiveState& s, const Vec& x_p, const Vec& r_s);

Vec ideal_control(const IdealGains& g, const Vec& x_p, const Vec& r_s);

/// Update laws in the m x n / m x q / m x m storage shapes:
///   dtheta_x = -B_p^T P e_x x_p^T Gamma_x
///   dtheta_r = -B_p^T P e_x r_s^T Gamma_r
///   dlambda  =  B_p^T P e_x du^T  Gamma_lambda
AdaptationRates adaptation_derivatives(const AdaptiveState& s, const Vec& x_p, const Vec& r_s, const Vec& e_x,
                                       const Mat& B_p, const Vec& du);

/// (A_m - L) e_x + B_p Lambda (tt_x x_p + tt_r r_s) + B_p tl du.
/// Pass L = 0 and du = 0 for the open-loop reference model.
Vec error_dynamics_rhs(const Mat& A_m, const Mat& L, const Mat& B_p, const Mat& Lambda, const Mat& tilde_theta_x,
                       const Mat& tilde_theta_r, const Mat& tilde_lambda, const Vec& e_x, const Vec& x_p,
                       const Vec& r_s, const Vec& du);

}  // namespace safeadapt
