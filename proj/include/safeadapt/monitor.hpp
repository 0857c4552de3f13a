#pragma once

#include <optional>
#include <vector>

#include "safeadapt/adaptation.hpp"
#include "safeadapt/barrier.hpp"
#include "safeadapt/plant.hpp"
#include "safeadapt/refmodel.hpp"

namespace safeadapt {

struct CertificateSample {
  double t = 0.0;
  double V = 0.0;
  std::vector<double> h_p;
  std::vector<double> h_m;
  std::vector<double> e_h;
  std::vector<double> gamma;
  std::vector<double> F_bar;
  std::vector<double> S_delta;
  bool safety_ok = true;
  bool filter_feasible = true;
};

struct DoaReport {
  double q_min = 0, p_min = 0, p_max = 0, rho = 0;
  double u_bar_max = 0, u_bar_min = 0, P_B = 0, lambda_min = 0, gamma_max = 0;
  double K_max = 0, r_max = 0, beta = 0, a0_sat = 0;
  std::optional<double> x_min;  // empty when q_min <= 3 P_B K_max
  double x_max = 0;
  std::optional<double> K_bar_max;  // empty when a0_sat = 0
  double norm_theta_x_star = 0, norm_theta_r_star = 0;
  double V0 = 0, x_p0_norm = 0;
  bool condition1_ok = false;
  bool condition2_ok = false;
};

struct SafetyWindowResult {
  double F_max = 0.0;
  double h0_required = 0.0;
  double min_h_p = 0.0;
  bool satisfied = false;
};

/// 0.5 e^T P e + 0.5 Tr(tt_x Gx^-1 tt_x^T Lambda) + 0.5 Tr(tt_r Gr^-1 tt_r^T Lambda),
/// plus 0.5 Tr(tl Gl^-1 tl^T) when include_lambda.
double lyapunov_value(const Vec& e_x, const Mat& tilde_theta_x, const Mat& tilde_theta_r, const Mat& tilde_lambda,
                      const Mat& P, const Mat& Gamma_x, const Mat& Gamma_r, const Mat& Gamma_lambda,
                      const Mat& Lambda, bool include_lambda);

/// gamma k2 |e_x| + |a0| |e_bar| + k1 |e_x| (|e_bar| + |a1|)
double safety_margin_orm(const BarrierSpec& bar, double a0_abs, double a1_abs, double e_bar_abs, double e_x_abs,
                         double gamma);

/// gamma k4 |e_x| + |c0| |e_bar_d| + k3 |e_x| (|c1| + |c2| + |c3| + |e_bar_d|) - c0^T S_delta,
/// with k3 = k1 and k4 = k2.
double safety_margin_ccrm(const BarrierSpec& bar, double c0_abs, double c1_abs, double c2_abs, double c3_abs,
                          double e_bar_delta_abs, double e_x_abs, double gamma, double c0_S_delta);

/// Window check: satisfied iff min h_p >= max F / gamma. Throws on an empty window.
SafetyWindowResult safety_condition(const std::vector<double>& h_p, const std::vector<double>& F, double gamma);

/// Index one past the end of the settling window: the first sample from which F stays
/// below Delta for hold_time seconds. Returns F.size() when that never happens.
std::size_t settling_window_end(const std::vector<double>& F, double Delta, double dt, double hold_time = 1.0);

struct DoaInputs {
  const UncertainPlant* plant = nullptr;
  const IdealGains* gains = nullptr;
  Mat P;
  Mat Q;
  Mat Gamma_x, Gamma_r, Gamma_lambda;
  double K_max = 0.0;
  double r_max = 0.0;
  Vec x_p0;
  double V0 = 0.0;
};

DoaReport doa_diagnostics(const DoaInputs& in);

/// Everything needed to evaluate certificates at one instant. e_u and the
/// parameter errors use the true plant and matched gains.
struct StepContext {
  double t = 0.0;
  bool closed_loop = false;
  const UncertainPlant* plant = nullptr;
  const ReferenceModelSpec* ref = nullptr;
  const IdealGains* gains = nullptr;
  const AdaptiveState* est = nullptr;
  const std::vector<BarrierSpec>* barriers = nullptr;
  Vec x_p, x_m, r_s, u, du;
  std::vector<double> gamma;
  bool filter_feasible = true;
};

CertificateSample certificate_sample(const StepContext& c);

}  // namespace safeadapt
