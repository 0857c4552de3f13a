#include "safeadapt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>


namespace safeadapt {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_shape(const Mat& a, Eigen::Index r, Eigen::Index c, const std::string& name) {
  require(a.rows() == r && a.cols() == c,
          name + ": expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " +
              std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void require_spd(const Mat& a, const std::string& name) {
  require(a.rows() == a.cols() && (a - a.transpose()).norm() <= tol::kSymmetry * std::max(1.0, a.norm()),
          name + " must be symmetric");
  require(Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().minCoeff() > 0.0, name + " must be positive definite");
}

// Packed ODE state [x_p; x_m; vec(theta_x); vec(theta_r); vec(lambda_hat)].
struct Layout {
  Eigen::Index n, m, q;
  Eigen::Index size() const { return 2 * n + m * n + m * q + m * m; }
  Eigen::Index off_tx() const { return 2 * n; }
  Eigen::Index off_tr() const { return 2 * n + m * n; }
  Eigen::Index off_lh() const { return 2 * n + m * n + m * q; }
};

Vec pack(const Layout& l, const Vec& xp, const Vec& xm, const Mat& tx, const Mat& tr, const Mat& lh) {
  Vec z(l.size());
  z.segment(0, l.n) = xp;
  z.segment(l.n, l.n) = xm;
  z.segment(l.off_tx(), l.m * l.n) = Eigen::Map<const Vec>(tx.data(), l.m * l.n);
  z.segment(l.off_tr(), l.m * l.q) = Eigen::Map<const Vec>(tr.data(), l.m * l.q);
  z.segment(l.off_lh(), l.m * l.m) = Eigen::Map<const Vec>(lh.data(), l.m * l.m);
  return z;
}

void unpack(const Layout& l, const Vec& z, Vec& xp, Vec& xm, Mat& tx, Mat& tr, Mat& lh) {
  xp = z.segment(0, l.n);
  xm = z.segment(l.n, l.n);
  tx = Eigen::Map<const Mat>(z.data() + l.off_tx(), l.m, l.n);
  tr = Eigen::Map<const Mat>(z.data() + l.off_tr(), l.m, l.q);
  lh = Eigen::Map<const Mat>(z.data() + l.off_lh(), l.m, l.m);
}

double resolve_delta(const SimConfig& c) {
  if (c.Delta) return *c.Delta;
  double h0 = std::numeric_limits<double>::infinity();
  for (const auto& b : c.barriers) h0 = std::min(h0, b.h(c.x_m0));
  if (!std::isfinite(h0)) return 0.01;
  return std::max(0.05 * c.gamma0 * h0, 0.01);
}

double resolve_r_max(const SimConfig& c, const DesiredTrajectory& traj, const Mat& bm_pinv) {
  if (std::isfinite(c.r_max)) return c.r_max;
  double r = 0.0;
  const auto steps = static_cast<long long>(std::llround(c.t_end / c.dt));
  for (long long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * c.dt;
    r = std::max(r, (bm_pinv * (traj.x_d_dot(t) - c.ref.A_m * traj.x_d(t))).norm());
  }
  return r;
}

}  // namespace

DesiredTrajectory TrajectoryDesc::build() const {
  switch (kind) {
    case TrajectoryKind::kConstant:
      return constant_setpoint(target);
    case TrajectoryKind::kStep:
      return step_command(target, t_step);
    case TrajectoryKind::kSmoothedStep:
      return smoothed_step(target, tau);
  }
  throw std::invalid_argument("unknown trajectory kind");
}

void SimConfig::validate() const {
  plant.validate();
  const auto nn = n();
  const auto mm = m();
  require(ref.A_m.rows() == nn, "refmodel: A_m dimension must match the plant");
  ref.validate(mode == Mode::kCcrm);
  const auto qq = q();
  require(dt > 0.0, "dt must be positive");
  require(t_end >= 0.0, "t_end must be >= 0");
  require_shape(Gamma_x, nn, nn, "Gamma_x");
  require_shape(Gamma_r, qq, qq, "Gamma_r");
  require_shape(Gamma_lambda, mm, mm, "Gamma_lambda");
  require_shape(Q, nn, nn, "Q");
  require_spd(Gamma_x, "Gamma_x");
  require_spd(Gamma_r, "Gamma_r");
  require_spd(Gamma_lambda, "Gamma_lambda");
  require_spd(Q, "Q");
  require_shape(theta_x0, mm, nn, "theta_x0");
  require_shape(theta_r0, mm, qq, "theta_r0");
  require_shape(lambda_hat0, mm, mm, "lambda_hat0");
  require(x_p0.size() == nn, "initial x_p dimension mismatch");
  require(x_m0.size() == nn, "initial x_m dimension mismatch");
  require(traj.target.size() == nn, "x_d dimension mismatch");
  require(gamma0 >= 0.0 && epsilon >= 0.0, "gamma0 and epsilon must be >= 0");
  require(!Delta || *Delta > 0.0, "delta_buffer must be positive");
  require(r_max > 0.0, "r_max must be positive");
  require(!K_max || *K_max >= 0.0, "K_max must be >= 0");
  require(barriers.size() <= 16, "at most 16 barriers supported");
  for (const auto& b : barriers) require(b.domain.lo.size() == nn, "barrier domain dimension mismatch");
}

SimConfig effective_config(const SimConfig& cfg) {
  SimConfig c = cfg;
  if (c.mode == Mode::kOrm) {
    c.plant.u0 = std::numeric_limits<double>::infinity();
    c.ref.L = Mat::Zero(c.n(), c.n());
  }
  if (!c.Delta) c.Delta = resolve_delta(c);
  return c;
}

TrajectoryLog run(const SimConfig& cfg) {
  const SimConfig c = effective_config(cfg);
  c.validate();
  const bool ccrm = c.mode == Mode::kCcrm;
  const Layout lay{c.n(), c.m(), c.q()};
  const UncertainPlant& pl = c.plant;
  const ReferenceModelSpec& ref = c.ref;

  TrajectoryLog log;
  log.dt = c.dt;
  log.Delta = *c.Delta;
  log.P = solve_lyapunov(ccrm ? Mat(ref.A_m - ref.L) : ref.A_m, c.Q);
  log.gains = ideal_gains(pl, ref.A_m, ref.B_m);
  const IdealGains& g = log.gains;

  AdaptiveState s{c.theta_x0, c.theta_r0, c.lambda_hat0, c.Gamma_x, c.Gamma_r, c.Gamma_lambda, log.P};
  const DesiredTrajectory traj = c.traj.build();
  const Mat bm_pinv = pinv(ref.B_m);
  const EbrParams ebr{c.gamma0, c.epsilon, *c.Delta};
  const Mat zero_m = Mat::Zero(lay.m, lay.m);

  if (ccrm) {
    const double k0 = std::max({spectral_norm(c.theta_x0 - g.theta_x_star), spectral_norm(c.theta_r0 - g.theta_r_star),
                                spectral_norm(pl.Lambda - c.lambda_hat0)});
    DoaInputs in;
    in.plant = &pl;
    in.gains = &g;
    in.P = log.P;
    in.Q = c.Q;
    in.Gamma_x = c.Gamma_x;
    in.Gamma_r = c.Gamma_r;
    in.Gamma_lambda = c.Gamma_lambda;
    in.K_max = c.K_max.value_or(k0);
    in.r_max = resolve_r_max(c, traj, bm_pinv);
    in.x_p0 = c.x_p0;
    in.V0 = lyapunov_value(c.x_p0 - c.x_m0, c.theta_x0 - g.theta_x_star, c.theta_r0 - g.theta_r_star,
                           pl.Lambda - c.lambda_hat0, log.P, c.Gamma_x, c.Gamma_r, c.Gamma_lambda, pl.Lambda, true);
    log.doa = doa_diagnostics(in);
  }

  Vec xp = c.x_p0;
  Vec xm = c.x_m0;
  Vec r_prev;
  const auto steps = static_cast<long long>(std::llround(c.t_end / c.dt));
  log.rows.reserve(static_cast<std::size_t>(steps + 1));

  for (long long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * c.dt;
    const Vec xd = traj.x_d(t);
    const Vec r_star = bm_pinv * (traj.x_d_dot(t) - ref.A_m * xd);
    const Vec ex = xp - xm;

    std::vector<double> gammas;
    gammas.reserve(c.barriers.size());
    for (const auto& b : c.barriers) gammas.push_back(c.ebr ? ebr_gamma(ebr, b.h(xp) - b.h(xm)) : c.gamma0);

    std::vector<LinearConstraint> cons;
    cons.reserve(c.barriers.size());
    if (ccrm) {
      const Vec rp = r_prev.size() ? r_prev : r_star;
      const Vec u_pre = control(s, xp, rp);
      const Vec du_pre = saturate(u_pre, pl.u0) - u_pre;
      const Vec exs = clamp_vec(ex, ref.e0);
      const Vec dus = clamp_vec(du_pre, ref.du0);
      for (std::size_t j = 0; j < c.barriers.size(); ++j) {
        cons.push_back(ccrm_constraint(c.barriers[j], xm, ref.A_m, ref.B_m, ref.L, pl.B_p, s.lambda_hat, exs, dus,
                                       gammas[j], *c.Delta));
      }
    } else {
      for (std::size_t j = 0; j < c.barriers.size(); ++j) {
        cons.push_back(orm_constraint(c.barriers[j], xm, ref.A_m, ref.B_m, gammas[j], *c.Delta));
      }
    }

    LogRow row;
    bool feasible = true;
    Vec r_s;
    row.lambdas = Vec::Zero(static_cast<Eigen::Index>(c.barriers.size()));
    try {
      FilterResult fr = solve_cbf_qp(cons, r_star);
      r_s = fr.r_s;
      row.lambdas = fr.lambdas;
    } catch (const InfeasibleFilter&) {
      feasible = false;
      ++log.infeasible_steps;
      r_s = r_prev.size() ? r_prev : r_star;
    }
    row.r_clamped = clamp_reference(r_s, c.r_max);
    if (row.r_clamped) ++log.clamped_steps;
    r_prev = r_s;

    const Vec u = control(s, xp, r_s);
    const Vec u_sat = saturate(u, pl.u0);
    const Vec du = u_sat - u;
    const Vec u_star = ideal_control(g, xp, r_s);

    const Mat tt_x = s.theta_x_hat - g.theta_x_star;
    const Mat tt_r = s.theta_r_hat - g.theta_r_star;
    const Mat tl = pl.Lambda - s.lambda_hat;
    const Vec xp_dot = plant_derivative(pl, xp, u);
    const Vec xm_dot = ccrm ? ccrm_derivative(ref, xm, r_s, ex, pl.B_p, s.lambda_hat, du) : orm_derivative(ref, xm, r_s);
    const Vec rhs = error_dynamics_rhs(ref.A_m, ref.L, pl.B_p, pl.Lambda, tt_x, tt_r, tl, ex, xp, r_s, du);

    row.t = t;
    row.x_p = xp;
    row.x_m = xm;
    row.x_d = xd;
    row.r_star = r_star;
    row.r_s = r_s;
    row.u = u;
    row.u_sat = u_sat;
    row.du = du;
    row.e_x = ex;
    row.e_u = u - u_star;
    row.err_dyn_residual = ((xp_dot - xm_dot) - rhs).norm();

    StepContext ctx;
    ctx.t = t;
    ctx.closed_loop = ccrm;
    ctx.plant = &pl;
    ctx.ref = &ref;
    ctx.gains = &g;
    ctx.est = &s;
    ctx.barriers = &c.barriers;
    ctx.x_p = xp;
    ctx.x_m = xm;
    ctx.r_s = r_s;
    ctx.u = u;
    ctx.du = du;
    ctx.gamma = gammas;
    ctx.filter_feasible = feasible;
    row.cert = certificate_sample(ctx);
    log.rows.push_back(std::move(row));

    if (k == steps) break;

    const Derivative f = [&](double, const Vec& z) {
      Vec xp_, xm_;
      Mat tx_, tr_, lh_;
      unpack(lay, z, xp_, xm_, tx_, tr_, lh_);
      AdaptiveState st{tx_, tr_, lh_, s.Gamma_x, s.Gamma_r, s.Gamma_lambda, s.P};
      const Vec u_ = control(st, xp_, r_s);
      const Vec du_ = saturate(u_, pl.u0) - u_;
      const Vec e_ = xp_ - xm_;
      Vec dz(lay.size());
      dz.segment(0, lay.n) = plant_derivative(pl, xp_, u_);
      dz.segment(lay.n, lay.n) =
          ccrm ? ccrm_derivative(ref, xm_, r_s, e_, pl.B_p, lh_, du_) : orm_derivative(ref, xm_, r_s);
      const AdaptationRates d = adaptation_derivatives(st, xp_, r_s, e_, pl.B_p, du_);
      const Mat dlh = ccrm ? d.dlambda_hat : zero_m;
      dz.segment(lay.off_tx(), lay.m * lay.n) = Eigen::Map<const Vec>(d.dtheta_x.data(), lay.m * lay.n);
      dz.segment(lay.off_tr(), lay.m * lay.q) = Eigen::Map<const Vec>(d.dtheta_r.data(), lay.m * lay.q);
      dz.segment(lay.off_lh(), lay.m * lay.m) = Eigen::Map<const Vec>(dlh.data(), lay.m * lay.m);
      return dz;
    };

    try {
      const Vec z = rk4_step(f, t, pack(lay, xp, xm, s.theta_x_hat, s.theta_r_hat, s.lambda_hat), c.dt);
      if (!z.allFinite()) throw NumericalBlowup(t + c.dt, "numerical blow-up at t = " + std::to_string(t + c.dt));
      unpack(lay, z, xp, xm, s.theta_x_hat, s.theta_r_hat, s.lambda_hat);
    } catch (const NumericalBlowup& e) {
      log.blew_up = true;
      log.blowup_time = e.time();
      log.error = e.what();
      break;
    }
  }
  return log;
}

std::vector<double> differentiate(const std::vector<double>& y, double dt) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (y[1] - y[0]) / dt;
  d[n - 1] = (y[n - 1] - y[n - 2]) / dt;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * dt);
  return d;
}

RunSummary summarize(const TrajectoryLog& log, double dv_tol) {
  RunSummary s;
  s.infeasible_steps = log.infeasible_steps;
  if (log.rows.empty()) return s;
  s.min_h_p = std::numeric_limits<double>::infinity();
  for (const auto& r : log.rows) {
    for (double h : r.cert.h_p) s.min_h_p = std::min(s.min_h_p, h);
    s.max_err_dyn_residual = std::max(s.max_err_dyn_residual, r.err_dyn_residual);
  }
  if (log.rows.front().cert.h_p.empty()) s.min_h_p = 0.0;
  s.final_e_x = log.rows.back().e_x.norm();
  s.final_e_u = log.rows.back().e_u.norm();
  s.max_dV = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
    const double dv = (log.rows[k + 1].cert.V - log.rows[k].cert.V) / log.dt;
    s.max_dV = std::max(s.max_dV, dv);
    if (dv > dv_tol) ++s.v_descent_violations;
  }
  if (log.rows.size() < 2) s.max_dV = 0.0;
  return s;
}

namespace {

SweepResult run_one(const SimConfig& base, const InitialCondition& ic) {
  SweepResult out;
  try {
    SimConfig c = base;
    c.x_p0 = ic.x_p;
    c.x_m0 = ic.x_m.value_or(ic.x_p);
    out.log = run(c);
    if (out.log.blew_up) {
      out.ok = false;
      out.error = out.log.error;
    }
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<SweepResult> sweep(const SimConfig& base, const std::vector<InitialCondition>& ics) {
  std::vector<SweepResult> out(ics.size());
  const auto n = static_cast<long long>(ics.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = run_one(base, ics[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<SweepResult> sweep_serial(const SimConfig& base, const std::vector<InitialCondition>& ics) {
  std::vector<SweepResult> out;
  out.reserve(ics.size());
  for (const auto& ic : ics) out.push_back(run_one(base, ic));
  return out;
}

}  // namespace safeadapt
