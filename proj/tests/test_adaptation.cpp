#include <doctest.h>

#include <random>

#include "safeadapt/adaptation.hpp"
#include "safeadapt/refmodel.hpp"

using namespace safeadapt;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

AdaptiveState state(const Mat& tx, const Mat& tr) {
  const Mat id = Mat::Identity(2, 2);
  return AdaptiveState{tx, tr, Mat::Zero(2, 2), id, id, id, id};
}

}  // namespace

TEST_CASE("control law") {
  const Mat id = Mat::Identity(2, 2);
  CHECK(control(state(Mat::Zero(2, 2), id), v2(5, 5), v2(1, 2)).isApprox(v2(1, 2)));
  CHECK(control(state(id, Mat::Zero(2, 2)), v2(1, 0), v2(3, 3)).isApprox(v2(1, 0)));
  CHECK(control(state(1.25 * id, -1.25 * id), v2(2, 0), v2(1, 0)).isApprox(v2(1.25, 0)));
}

TEST_CASE("ideal control and input error") {
  const Mat id = Mat::Identity(2, 2);
  const IdealGains g{1.25 * id, -1.25 * id};
  const Vec xp = v2(1, 0);
  const Vec rs = v2(0.3, -0.2);
  CHECK((control(state(g.theta_x_star, g.theta_r_star), xp, rs) - ideal_control(g, xp, rs)).isZero());
  const Vec eu = control(state(g.theta_x_star + id, g.theta_r_star), xp, rs) - ideal_control(g, xp, rs);
  CHECK(eu.isApprox(v2(1, 0)));
  CHECK(ideal_control(g, Vec::Zero(2), Vec::Zero(2)).isZero());
}

TEST_CASE("adaptation derivatives") {
  const Mat id = Mat::Identity(2, 2);
  const auto s = state(Mat::Zero(2, 2), Mat::Zero(2, 2));
  auto d = adaptation_derivatives(s, v2(1, 2), v2(3, 4), Vec::Zero(2), id, v2(1, 1));
  CHECK(d.dtheta_x.isZero());
  CHECK(d.dtheta_r.isZero());
  CHECK(d.dlambda_hat.isZero());

  d = adaptation_derivatives(s, v2(1, 0), v2(0, 0), v2(1, 0), id, Vec::Zero(2));
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = -1.0;
  CHECK(d.dtheta_x.isApprox(expect));
  CHECK(d.dlambda_hat.isZero());
}

TEST_CASE("update laws are the transposes of the matrix-product form") {
  std::mt19937 rng(31);
  for (int k = 0; k < 20; ++k) {
    const Mat gx = Mat::Random(3, 3);
    const Mat gr = Mat::Random(2, 2);
    const Mat gl = Mat::Random(2, 2);
    AdaptiveState s{Mat::Zero(2, 3), Mat::Zero(2, 2), Mat::Zero(2, 2), gx * gx.transpose() + Mat::Identity(3, 3),
                    gr * gr.transpose() + Mat::Identity(2, 2), gl * gl.transpose() + Mat::Identity(2, 2),
                    Mat::Identity(3, 3)};
    const Mat bp = Mat::Random(3, 2);
    const Vec xp = Vec::Random(3), rs = Vec::Random(2), ex = Vec::Random(3), du = Vec::Random(2);
    const auto d = adaptation_derivatives(s, xp, rs, ex, bp, du);
    const Mat lawx = -s.Gamma_x * xp * ex.transpose() * s.P * bp;
    const Mat lawr = -s.Gamma_r * rs * ex.transpose() * s.P * bp;
    const Mat lawl = s.Gamma_lambda * du * ex.transpose() * s.P * bp;
    CHECK((d.dtheta_x - lawx.transpose()).norm() < 1e-12);
    CHECK((d.dtheta_r - lawr.transpose()).norm() < 1e-12);
    CHECK((d.dlambda_hat - lawl.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("error dynamics rhs") {
  const Mat id = Mat::Identity(2, 2);
  const Mat z = Mat::Zero(2, 2);
  CHECK(error_dynamics_rhs(-id, z, id, id, z, z, z, v2(1, 0), v2(3, 3), v2(1, 1), Vec::Zero(2)).isApprox(v2(-1, 0)));
  CHECK(error_dynamics_rhs(-id, z, id, id, z, z, z, Vec::Zero(2), Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)).isZero());
}

TEST_CASE("error dynamics match direct subtraction on random instances") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> ud(0.5, 2.0);
  for (int k = 0; k < 200; ++k) {
    const bool closed = k % 2 == 1;
    UncertainPlant p{Mat::Random(2, 2), Mat::Random(2, 2), Mat::Identity(2, 2), closed ? 0.5 : 1e300};
    p.Lambda.diagonal() << ud(rng), ud(rng);
    ReferenceModelSpec ref{-Mat::Identity(2, 2) + 0.1 * Mat::Random(2, 2), Mat::Random(2, 2),
                           closed ? Mat(Mat::Identity(2, 2)) : Mat(Mat::Zero(2, 2)), 1.0, 1.0};
    const IdealGains g = ideal_gains(p, ref.A_m, ref.B_m);
    AdaptiveState s{Mat::Random(2, 2), Mat::Random(2, 2), closed ? Mat(Mat::Random(2, 2)) : Mat(Mat::Zero(2, 2)),
                    Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2)};
    const Vec xp = Vec::Random(2), xm = Vec::Random(2), rs = Vec::Random(2);
    const Vec u = control(s, xp, rs);
    const Vec du = saturate(u, p.u0) - u;
    const Vec ex = xp - xm;
    const Vec direct = plant_derivative(p, xp, u) -
                       (closed ? ccrm_derivative(ref, xm, rs, ex, p.B_p, s.lambda_hat, du) : orm_derivative(ref, xm, rs));
    const Vec rhs = error_dynamics_rhs(ref.A_m, ref.L, p.B_p, p.Lambda, s.theta_x_hat - g.theta_x_star,
                                       s.theta_r_hat - g.theta_r_star, p.Lambda - s.lambda_hat, ex, xp, rs, du);
    CHECK((direct - rhs).norm() <= 1e-10);
  }
}
