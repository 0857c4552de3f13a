#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "safeadapt/adaptation.hpp"
#include "safeadapt/barrier.hpp"
#include "safeadapt/monitor.hpp"
#include "safeadapt/plant.hpp"
#include "safeadapt/refmodel.hpp"
#include "safeadapt/safety_filter.hpp"

namespace safeadapt {

enum class Mode { kOrm, kCcrm };

struct TrajectoryDesc {
  TrajectoryKind kind = TrajectoryKind::kConstant;
  Vec target;
  double tau = 0.2;
  double t_step = 0.0;

  DesiredTrajectory build() const;
};

struct SimConfig {
  std::string name = "custom";
  Mode mode = Mode::kOrm;
  bool ebr = true;
  double dt = 1e-3;
  double t_end = 1.0;

  UncertainPlant plant;
  ReferenceModelSpec ref;
  TrajectoryDesc traj;
  std::vector<BarrierSpec> barriers;

  double gamma0 = 1.0;
  double epsilon = 5.0;
  std::optional<double> Delta;  // resolved from the initial state when empty

  Mat Gamma_x, Gamma_r, Gamma_lambda, Q;
  Vec x_p0, x_m0;
  Mat theta_x0, theta_r0, lambda_hat0;

  double r_max = std::numeric_limits<double>::infinity();
  std::optional<double> K_max;  // defaults to the largest initial parameter-error norm
  std::uint64_t seed = 0;

  Eigen::Index n() const { return plant.n(); }
  Eigen::Index m() const { return plant.m(); }
  Eigen::Index q() const { return ref.B_m.cols(); }

  /// Throws std::invalid_argument on any dimension or invariant violation.
  void validate() const;
};

struct LogRow {
  double t = 0.0;
  Vec x_p, x_m, x_d, r_star, r_s, u, u_sat, du, e_x, e_u;
  Vec lambdas;  // filter multiplier per barrier
  CertificateSample cert;
  double err_dyn_residual = 0.0;
  bool r_clamped = false;
};

struct TrajectoryLog {
  std::vector<LogRow> rows;
  double dt = 0.0;
  double Delta = 0.0;
  Mat P;
  IdealGains gains;
  int infeasible_steps = 0;
  int clamped_steps = 0;
  bool blew_up = false;
  double blowup_time = 0.0;
  std::string error;
  std::optional<DoaReport> doa;
};

struct RunSummary {
  double min_h_p = 0.0;
  double final_e_x = 0.0;
  double final_e_u = 0.0;
  int infeasible_steps = 0;
  int v_descent_violations = 0;
  double max_dV = 0.0;
  double max_err_dyn_residual = 0.0;
};

/// Resolved, mode-adjusted copy of the config: ORM forces u0 = inf, L = 0.
SimConfig effective_config(const SimConfig& cfg);

TrajectoryLog run(const SimConfig& cfg);

/// Finite-differenced V, h and summary statistics over a finished log.
RunSummary summarize(const TrajectoryLog& log, double dv_tol = 1e-6);

/// Central-difference derivative of a logged series (one-sided at the ends).
std::vector<double> differentiate(const std::vector<double>& y, double dt);

struct InitialCondition {
  Vec x_p;
  std::optional<Vec> x_m;
};

struct SweepResult {
  TrajectoryLog log;
  bool ok = true;
  std::string error;
};

/// Independent runs, one per initial condition, in parallel. Output order matches input.
std::vector<SweepResult> sweep(const SimConfig& base, const std::vector<InitialCondition>& ics);

/// Serial reference for sweep.
std::vector<SweepResult> sweep_serial(const SimConfig& base, const std::vector<InitialCondition>& ics);

}  // namespace safeadapt
