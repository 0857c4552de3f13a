#include "safeadapt/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safeadapt {

double lyapunov_value(const Vec& e_x, const Mat& tilde_theta_x, const Mat& tilde_theta_r, const Mat& tilde_lambda,
                      const Mat& P, const Mat& Gamma_x, const Mat& Gamma_r, const Mat& Gamma_lambda,
                      const Mat& Lambda, bool include_lambda) {
  double v = 0.5 * e_x.dot(P * e_x);
  // Tr(X G^-1 X^T W) with G^-1 X^T obtained by a solve.
  const Mat gx = Gamma_x.ldlt().solve(tilde_theta_x.transpose());
  const Mat gr = Gamma_r.ldlt().solve(tilde_theta_r.transpose());
  v += 0.5 * (tilde_theta_x * gx * Lambda).trace();
  v += 0.5 * (tilde_theta_r * gr * Lambda).trace();
  if (include_lambda) {
    const Mat gl = Gamma_lambda.ldlt().solve(tilde_lambda.transpose());
    v += 0.5 * (tilde_lambda * gl).trace();
  }
  return v;
}

double safety_margin_orm(const BarrierSpec& bar, double a0_abs, double a1_abs, double e_bar_abs, double e_x_abs,
                         double gamma) {
  return gamma * bar.kappa2 * e_x_abs + a0_abs * e_bar_abs + bar.kappa1 * e_x_abs * (e_bar_abs + a1_abs);
}

double safety_margin_ccrm(const BarrierSpec& bar, double c0_abs, double c1_abs, double c2_abs, double c3_abs,
                          double e_bar_delta_abs, double e_x_abs, double gamma, double c0_S_delta) {
  return gamma * bar.kappa2 * e_x_abs + c0_abs * e_bar_delta_abs +
         bar.kappa1 * e_x_abs * (c1_abs + c2_abs + c3_abs + e_bar_delta_abs) - c0_S_delta;
}

SafetyWindowResult safety_condition(const std::vector<double>& h_p, const std::vector<double>& F, double gamma) {
  if (h_p.empty() || F.empty()) throw std::invalid_argument("safety_condition: empty window");
  if (!(gamma > 0.0)) throw std::invalid_argument("safety_condition: gamma must be positive");
  SafetyWindowResult r;
  r.F_max = *std::max_element(F.begin(), F.end());
  r.h0_required = r.F_max / gamma;
  r.min_h_p = *std::min_element(h_p.begin(), h_p.end());
  r.satisfied = r.min_h_p >= r.h0_required;
  return r;
}

std::size_t settling_window_end(const std::vector<double>& F, double Delta, double dt, double hold_time) {
  const auto hold = static_cast<std::size_t>(std::ceil(hold_time / dt));
  std::size_t run = 0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    run = F[k] < Delta ? run + 1 : 0;
    if (run > hold) return std::max<std::size_t>(1, k + 1 - run);
  }
  return F.size();
}

DoaReport doa_diagnostics(const DoaInputs& in) {
  if (in.plant == nullptr || in.gains == nullptr) throw std::invalid_argument("doa_diagnostics: missing inputs");
  const UncertainPlant& p = *in.plant;
  DoaReport d;
  Eigen::SelfAdjointEigenSolver<Mat> qe(in.Q);
  Eigen::SelfAdjointEigenSolver<Mat> pe(in.P);
  d.q_min = qe.eigenvalues().minCoeff();
  d.p_min = pe.eigenvalues().minCoeff();
  d.p_max = pe.eigenvalues().maxCoeff();
  d.rho = std::sqrt(d.p_max / d.p_min);
  // The norm limit bounds every channel by u0.
  d.u_bar_max = p.u0;
  d.u_bar_min = p.u0;
  d.P_B = spectral_norm(in.P * p.B_p * p.Lambda);
  d.lambda_min = p.Lambda.diagonal().minCoeff();
  d.gamma_max = std::max({Eigen::SelfAdjointEigenSolver<Mat>(in.Gamma_x).eigenvalues().maxCoeff(),
                          Eigen::SelfAdjointEigenSolver<Mat>(in.Gamma_r).eigenvalues().maxCoeff(),
                          Eigen::SelfAdjointEigenSolver<Mat>(in.Gamma_lambda).eigenvalues().maxCoeff()});
  d.K_max = in.K_max;
  d.r_max = in.r_max;
  const double tx = spectral_norm(in.gains->theta_x_star);
  const double tr = spectral_norm(in.gains->theta_r_star);
  d.norm_theta_x_star = tx;
  d.norm_theta_r_star = tr;
  const double denom_k = tx + d.K_max;
  d.beta = denom_k > 0.0 ? d.P_B * d.K_max / denom_k : 0.0;
  d.a0_sat = denom_k > 0.0 ? d.u_bar_min * d.K_max / denom_k : 0.0;

  const double den_min = d.q_min - 3.0 * d.P_B * d.K_max;
  if (den_min > 0.0) {
    d.x_min = (3.0 * d.P_B * d.K_max * (d.r_max + 1.0) + 3.0 * d.P_B * tr * d.r_max + 2.0 * d.P_B * d.u_bar_max) /
              den_min;
  }
  const double den_max = std::abs(d.q_min - 2.0 * d.P_B * d.K_max);
  d.x_max = den_max > 0.0 ? d.P_B * d.a0_sat / den_max : 0.0;

  if (d.a0_sat > 0.0) {
    const double ra = d.rho / d.a0_sat;
    const double num = d.q_min - ra * (3.0 * tr * d.r_max + 2.0 * d.u_bar_max) * d.q_min - 2.0 * d.P_B * tx;
    const double den = 3.0 * d.P_B + 3.0 * ra * (d.r_max + 1.0) * std::abs(d.q_min - 2.0 * d.P_B * tx);
    d.K_bar_max = num / den;
  }

  d.x_p0_norm = in.x_p0.size() > 0 ? in.x_p0.norm() : 0.0;
  d.V0 = in.V0;
  d.condition1_ok = d.x_p0_norm < d.x_max / d.rho;
  d.condition2_ok = d.K_bar_max.has_value() && *d.K_bar_max > 0.0 &&
                    std::sqrt(d.V0) < *d.K_bar_max * std::sqrt(d.lambda_min / d.gamma_max);
  return d;
}

CertificateSample certificate_sample(const StepContext& c) {
  const UncertainPlant& p = *c.plant;
  const ReferenceModelSpec& ref = *c.ref;
  const IdealGains& g = *c.gains;
  const AdaptiveState& s = *c.est;
  const auto& bars = *c.barriers;

  CertificateSample out;
  out.t = c.t;
  out.filter_feasible = c.filter_feasible;

  const Vec e_x = c.x_p - c.x_m;
  const Mat tt_x = s.theta_x_hat - g.theta_x_star;
  const Mat tt_r = s.theta_r_hat - g.theta_r_star;
  const Mat tl = p.Lambda - s.lambda_hat;
  out.V = lyapunov_value(e_x, tt_x, tt_r, tl, s.P, s.Gamma_x, s.Gamma_r, s.Gamma_lambda, p.Lambda, c.closed_loop);

  const Vec e_u = tt_x * c.x_p + tt_r * c.r_s;
  const Vec e_bar = ref.A_m * e_x + p.B_p * (p.Lambda * e_u);
  const Vec a1 = ref.A_m * c.x_m + ref.B_m * c.r_s;
  const double ex_abs = e_x.norm();

  Vec e_bar_d, c2, c3, s_delta;
  if (c.closed_loop) {
    e_bar_d = e_bar - ref.L * e_x + p.B_p * (tl * c.du);
    c2 = ref.L * e_x;
    c3 = p.B_p * (s.lambda_hat * c.du);
    const Vec dex = clamp_vec(e_x, ref.e0) - e_x;
    const Vec ddu = clamp_vec(c.du, ref.du0) - c.du;
    s_delta = ref.L * dex + p.B_p * (s.lambda_hat * ddu);
  }

  for (std::size_t j = 0; j < bars.size(); ++j) {
    const BarrierSpec& b = bars[j];
    const double hp = b.h(c.x_p);
    const double hm = b.h(c.x_m);
    const double gam = c.gamma[j];
    const Vec a0 = b.grad(c.x_m);
    double f;
    double sd = 0.0;
    if (c.closed_loop) {
      sd = a0.dot(s_delta);
      f = safety_margin_ccrm(b, a0.norm(), a1.norm(), c2.norm(), c3.norm(), e_bar_d.norm(), ex_abs, gam, sd);
    } else {
      f = safety_margin_orm(b, a0.norm(), a1.norm(), e_bar.norm(), ex_abs, gam);
    }
    out.h_p.push_back(hp);
    out.h_m.push_back(hm);
    out.e_h.push_back(hp - hm);
    out.gamma.push_back(gam);
    out.F_bar.push_back(f);
    out.S_delta.push_back(sd);
    if (hp < 0.0) out.safety_ok = false;
  }
  return out;
}

}  // namespace safeadapt
