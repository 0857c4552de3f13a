#include "safeadapt/adaptation.hpp"

namespace safeadapt {

Vec control(const AdaptiveState& s, const Vec& x_p, const Vec& r_s) {
  return s.theta_x_hat * x_p + s.theta_r_hat * r_s;
}

Vec ideal_control(const IdealGains& g, const Vec& x_p, const Vec& r_s) {
  return g.theta_x_star * x_p + g.theta_r_star * r_s;
}

AdaptationRates adaptation_derivatives(const AdaptiveState& s, const Vec& x_p, const Vec& r_s, const Vec& e_x,
                                       const Mat& B_p, const Vec& du) {
  const Vec w = B_p.transpose() * (s.P * e_x);
  AdaptationRates d;
  d.dtheta_x = -w * (s.Gamma_x * x_p).transpose();
  d.dtheta_r = -w * (s.Gamma_r * r_s).transpose();
  d.dlambda_hat = w * (s.Gamma_lambda * du).transpose();
  return d;
}

Vec error_dynamics_rhs(const Mat& A_m, const Mat& L, const Mat& B_p, const Mat& Lambda, const Mat& tilde_theta_x,
                       const Mat& tilde_theta_r, const Mat& tilde_lambda, const Vec& e_x, const Vec& x_p,
                       const Vec& r_s, const Vec& du) {
  return (A_m - L) * e_x + B_p * (Lambda * (tilde_theta_x * x_p + tilde_theta_r * r_s)) +
         B_p * (tilde_lambda * du);
}

}  // namespace safeadapt
