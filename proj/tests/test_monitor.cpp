#include <doctest.h>

#include <cmath>
#include <random>

#include "safeadapt/monitor.hpp"
#include "safeadapt/scenario.hpp"
#include "safeadapt/simulator.hpp"

using namespace safeadapt;

#define FROZEN_RHO 7.03289245939
#define FROZEN_PB 5.77132664841
#define FROZEN_XMAX 0.101015336865
#define FROZEN_KBAR -0.233111935912

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

BarrierSpec with_kappas(double k1, double k2) {
  BarrierSpec b = halfspace_barrier(1.0);
  b.kappa1 = k1;
  b.kappa2 = k2;
  return b;
}

double v_of(const Vec& e, const Mat& tx, const Mat& tr, const Mat& tl, bool lam) {
  const Mat id = Mat::Identity(2, 2);
  return lyapunov_value(e, tx, tr, tl, id, id, id, id, id, lam);
}

}  // namespace

TEST_CASE("lyapunov value examples") {
  const Mat z = Mat::Zero(2, 2);
  const Mat id = Mat::Identity(2, 2);
  CHECK(v_of(Vec::Zero(2), z, z, z, true) == 0.0);
  CHECK(v_of(v2(1, 0), z, z, z, false) == doctest::Approx(0.5));
  CHECK(v_of(Vec::Zero(2), id, z, z, false) == doctest::Approx(1.0));
  CHECK(v_of(Vec::Zero(2), z, z, id, false) == 0.0);
  CHECK(v_of(Vec::Zero(2), z, z, id, true) == doctest::Approx(1.0));
}

TEST_CASE("lyapunov value is nonnegative and scales with inverse gains") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  auto rnd = [&](int r, int c) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Mat a = rnd(2, 2);
    const Mat P = a * a.transpose() + 0.1 * Mat::Identity(2, 2);
    const Mat g = 2.0 * Mat::Identity(2, 2);
    Mat lam = Mat::Zero(2, 2);
    lam.diagonal() << 0.5 + std::abs(nd(rng)), 0.5 + std::abs(nd(rng));
    const Mat tx = rnd(2, 2), tr = rnd(2, 2), tl = rnd(2, 2);
    const Vec e = rnd(2, 1);
    const double v = lyapunov_value(e, tx, tr, tl, P, g, g, g, lam, true);
    CHECK(v >= 0.0);
    const double direct = 0.5 * e.dot(P * e) + 0.25 * (tx * tx.transpose() * lam).trace() +
                          0.25 * (tr * tr.transpose() * lam).trace() + 0.25 * (tl * tl.transpose()).trace();
    CHECK(v == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("orm safety margin") {
  const BarrierSpec circ = with_kappas(2.0, 6.0 * std::sqrt(2.0));
  CHECK(safety_margin_orm(circ, 2.0, 3.0, 0.0, 0.0, 1.0) == 0.0);
  CHECK(safety_margin_orm(circ, 2.0, 3.0, 0.5, 0.1, 1.0) == doctest::Approx(0.6 * std::sqrt(2.0) + 1.7));
  CHECK(safety_margin_orm(circ, 2.0, 3.0, 0.5, 0.1, 1.0) == doctest::Approx(2.5485).epsilon(1e-4));
  const BarrierSpec half = with_kappas(0.0, 1.0);
  CHECK(safety_margin_orm(half, 2.0, 3.0, 0.5, 0.1, 4.0) == doctest::Approx(0.4 + 1.0));
}

TEST_CASE("ccrm safety margin") {
  const BarrierSpec b = with_kappas(2.0, 1.0);
  CHECK(safety_margin_ccrm(b, 1.0, 1.0, 0.0, 0.0, 0.2, 0.1, 1.0, 0.0) == doctest::Approx(0.54));
  CHECK(safety_margin_ccrm(b, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(safety_margin_ccrm(b, 1.0, 1.0, 0.0, 0.0, 0.2, 0.1, 1.0, 0.04) == doctest::Approx(0.50));
  for (double g : {0.5, 1.0, 3.0}) {
    CHECK(safety_margin_ccrm(b, 2.0, 3.0, 0.0, 0.0, 0.5, 0.1, g, 0.0) ==
          doctest::Approx(safety_margin_orm(b, 2.0, 3.0, 0.5, 0.1, g)));
  }
}

TEST_CASE("safety condition window") {
  auto r = safety_condition({0.3, 0.2, 0.4}, {0.0, 0.0, 0.0}, 1.0);
  CHECK(r.h0_required == 0.0);
  CHECK(r.satisfied);
  r = safety_condition({1.0, 0.6}, {1.0, 1.0}, 2.0);
  CHECK(r.F_max == 1.0);
  CHECK(r.h0_required == doctest::Approx(0.5));
  CHECK(r.min_h_p == 0.6);
  CHECK(r.satisfied);
  r = safety_condition({1.0, 0.4}, {1.0, 1.0}, 2.0);
  CHECK_FALSE(r.satisfied);
  CHECK_FALSE(safety_condition({-0.1}, {0.0}, 1.0).satisfied);
  CHECK_THROWS_AS(safety_condition({}, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(safety_condition({1.0}, {1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("settling window end") {
  std::vector<double> f(100, 0.001);
  for (int k = 0; k < 20; ++k) f[k] = 1.0;
  CHECK(settling_window_end(f, 0.01, 0.1, 1.0) == 20);
  CHECK(settling_window_end(std::vector<double>(50, 1.0), 0.01, 0.1, 1.0) == 50);
  CHECK(settling_window_end(std::vector<double>(50, 0.0), 0.01, 0.1, 1.0) == 1);
  // A relapse resets the hold.
  f[50] = 1.0;
  CHECK(settling_window_end(f, 0.01, 0.1, 1.0) == 20);
  f[25] = 1.0;
  CHECK(settling_window_end(f, 0.01, 0.1, 1.0) == 26);
}

namespace {

DoaInputs simple_inputs(const UncertainPlant& p, const IdealGains& g, double k_max) {
  DoaInputs in;
  in.plant = &p;
  in.gains = &g;
  in.P = Mat::Identity(2, 2);
  in.Q = Mat::Identity(2, 2);
  in.Gamma_x = in.Gamma_r = in.Gamma_lambda = Mat::Identity(2, 2);
  in.K_max = k_max;
  in.r_max = 1.0;
  in.x_p0 = v2(0.1, 0.0);
  in.V0 = 0.01;
  return in;
}

}  // namespace

TEST_CASE("doa diagnostics boundary cases") {
  UncertainPlant p{-2.0 * Mat::Identity(2, 2), 0.8 * Mat::Identity(2, 2), Mat::Identity(2, 2), 10.0};
  const IdealGains g = ideal_gains(p, -Mat::Identity(2, 2), -Mat::Identity(2, 2));
  DoaReport d = doa_diagnostics(simple_inputs(p, g, 0.5));
  CHECK(d.rho == doctest::Approx(1.0));
  CHECK(d.p_min == doctest::Approx(1.0));
  CHECK(d.p_max == doctest::Approx(1.0));
  CHECK(d.P_B == doctest::Approx(0.8));
  CHECK(d.u_bar_max == 10.0);

  d = doa_diagnostics(simple_inputs(p, g, 0.0));
  CHECK(d.a0_sat == 0.0);
  CHECK(d.x_max == 0.0);
  CHECK_FALSE(d.K_bar_max.has_value());
  CHECK_FALSE(d.condition1_ok);
  CHECK_FALSE(d.condition2_ok);

  // q_min = 1 <= 3 P_B K_max = 2.4: x_min undefined.
  d = doa_diagnostics(simple_inputs(p, g, 1.0));
  CHECK_FALSE(d.x_min.has_value());
  d = doa_diagnostics(simple_inputs(p, g, 0.1));
  CHECK(d.x_min.has_value());
  CHECK_THROWS(doa_diagnostics(DoaInputs{}));
}

TEST_CASE("P_B bounds the induced norm on random vectors") {
  const MissileModel mm = missile_model();
  UncertainPlant p{mm.A_p, mm.B_p, mm.Lambda, 10.0 * kDegToRad};
  const IdealGains g = ideal_gains(p, mm.A_m, mm.B_m);
  DoaInputs in;
  in.plant = &p;
  in.gains = &g;
  in.Q = Mat::Identity(2, 2);
  in.P = solve_lyapunov(mm.A_m - Mat::Identity(2, 2), in.Q);
  in.Gamma_x = Mat::Identity(2, 2);
  in.Gamma_r = in.Gamma_lambda = Mat::Identity(1, 1);
  in.K_max = 0.5;
  in.r_max = 1.0;
  in.x_p0 = Vec::Zero(2);
  const DoaReport d = doa_diagnostics(in);
  const Mat pb = in.P * p.B_p * p.Lambda;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 500; ++k) {
    Vec v(1);
    v << nd(rng);
    CHECK((pb * v).norm() <= d.P_B * v.norm() * (1.0 + 1e-12));
  }
  CHECK(d.rho >= 1.0);
}

// Independent transcription of the domain-of-attraction preamble quantities.
TEST_CASE("missile doa report matches direct formula evaluation") {
  const SimConfig cfg = preset("missile");
  const TrajectoryLog log = run([&] {
    SimConfig c = cfg;
    c.t_end = 0.0;
    return c;
  }());
  REQUIRE(log.doa.has_value());
  const DoaReport& d = *log.doa;

  const UncertainPlant& p = cfg.plant;
  const Mat P = solve_lyapunov(cfg.ref.A_m - cfg.ref.L, cfg.Q);
  const Eigen::Vector2d pe = Eigen::SelfAdjointEigenSolver<Mat>(P).eigenvalues();
  const double rho = std::sqrt(pe(1) / pe(0));
  const Mat pbl = P * p.B_p * p.Lambda;
  const double P_B = std::sqrt((pbl.transpose() * pbl)(0, 0));
  const Mat blam = p.B_p * p.Lambda;
  const Mat bl_pinv = (blam.transpose() * blam).inverse() * blam.transpose();
  const Mat tx_star = bl_pinv * (cfg.ref.A_m - p.A_p);
  const double th_x = std::sqrt((tx_star * tx_star.transpose())(0, 0));
  const double th_r = std::abs((bl_pinv * cfg.ref.B_m)(0, 0));
  const double K = std::max({std::abs(cfg.theta_r0(0, 0) - (bl_pinv * cfg.ref.B_m)(0, 0)), th_x,
                             std::abs(p.Lambda(0, 0) - cfg.lambda_hat0(0, 0))});
  const double u = p.u0;
  const double a0 = u * K / (th_x + K);
  const double q = 1.0;
  const double x_max = P_B * a0 / std::abs(q - 2.0 * P_B * K);
  const double r = cfg.r_max;
  const double kbar = (q - (rho / a0) * (3.0 * th_r * r + 2.0 * u) * q - 2.0 * P_B * th_x) /
                      (3.0 * P_B + 3.0 * (rho / a0) * (r + 1.0) * std::abs(q - 2.0 * P_B * th_x));

  CHECK(d.rho == doctest::Approx(rho).epsilon(1e-10));
  CHECK(d.P_B == doctest::Approx(P_B).epsilon(1e-10));
  CHECK(d.K_max == doctest::Approx(K).epsilon(1e-10));
  CHECK(d.a0_sat == doctest::Approx(a0).epsilon(1e-10));
  CHECK(d.x_max == doctest::Approx(x_max).epsilon(1e-10));
  REQUIRE(d.K_bar_max.has_value());
  CHECK(*d.K_bar_max == doctest::Approx(kbar).epsilon(1e-10));
  CHECK(d.x_min.has_value() == (q > 3.0 * P_B * K));
  CHECK(d.lambda_min == doctest::Approx(0.6));
  CHECK(d.gamma_max == doctest::Approx(400.0));

  // Frozen regression constants from the first evaluation.
  CHECK(d.rho == doctest::Approx(FROZEN_RHO).epsilon(1e-6));
  CHECK(d.P_B == doctest::Approx(FROZEN_PB).epsilon(1e-6));
  CHECK(d.x_max == doctest::Approx(FROZEN_XMAX).epsilon(1e-6));
  CHECK(*d.K_bar_max == doctest::Approx(FROZEN_KBAR).epsilon(1e-6));
}

TEST_CASE("K_bar_max is negative whenever the saturation level is the norm limit") {
  // With a0 <= u_bar_min = u_bar_max and rho >= 1 the numerator is below -q_min.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.05, 5.0);
  for (int k = 0; k < 200; ++k) {
    UncertainPlant p{-Mat::Identity(2, 2), ud(rng) * Mat::Identity(2, 2), Mat::Identity(2, 2), ud(rng)};
    const IdealGains g = ideal_gains(p, -2.0 * Mat::Identity(2, 2), Mat::Identity(2, 2));
    DoaInputs in = simple_inputs(p, g, ud(rng));
    in.r_max = ud(rng);
    const DoaReport d = doa_diagnostics(in);
    REQUIRE(d.K_bar_max.has_value());
    CHECK(*d.K_bar_max < 0.0);
    CHECK_FALSE(d.condition2_ok);
  }
}

TEST_CASE("certificate sample on a converged state") {
  UncertainPlant p{-2.0 * Mat::Identity(2, 2), 0.8 * Mat::Identity(2, 2), Mat::Identity(2, 2), 10.0};
  ReferenceModelSpec ref{-Mat::Identity(2, 2), -Mat::Identity(2, 2), Mat::Identity(2, 2), 1.0, 10.0};
  const IdealGains g = ideal_gains(p, ref.A_m, ref.B_m);
  const Mat id = Mat::Identity(2, 2);
  AdaptiveState s{g.theta_x_star, g.theta_r_star, p.Lambda, id, id, id, solve_lyapunov(ref.A_m, id)};
  const std::vector<BarrierSpec> bars{circle_barrier(0.0, 0.0, 1.0, Box{v2(-4, -4), v2(4, 4)})};
  for (bool closed : {false, true}) {
    StepContext c;
    c.closed_loop = closed;
    c.plant = &p;
    c.ref = &ref;
    c.gains = &g;
    c.est = &s;
    c.barriers = &bars;
    c.x_p = c.x_m = v2(2.0, 1.0);
    c.r_s = v2(0.1, -0.2);
    c.u = control(s, c.x_p, c.r_s);
    c.du = Vec::Zero(2);
    c.gamma = {1.0};
    const CertificateSample cs = certificate_sample(c);
    CHECK(cs.V == doctest::Approx(0.0));
    CHECK(cs.e_h[0] == 0.0);
    CHECK(cs.F_bar[0] == doctest::Approx(0.0));
    CHECK(cs.h_p[0] == doctest::Approx(4.0));
    CHECK(cs.e_h[0] == cs.h_p[0] - cs.h_m[0]);
    CHECK(cs.safety_ok);
  }
}
