#include <doctest.h>

#include <random>

#include "safeadapt/plant.hpp"

using namespace safeadapt;

namespace {

UncertainPlant obstacle_plant() {
  return UncertainPlant{-2.0 * Mat::Identity(2, 2), 0.8 * Mat::Identity(2, 2), Mat::Identity(2, 2), 10.0};
}

UncertainPlant missile_plant() {
  UncertainPlant p;
  p.A_p.resize(2, 2);
  p.A_p << -0.8757, 1.0, -68.9210, 0.0;
  p.A_p *= 1.2;
  p.B_p.resize(2, 1);
  p.B_p << -0.1531, -74.2313;
  p.Lambda = Mat::Constant(1, 1, 0.6);
  p.u0 = 10.0 * 3.14159265358979323846 / 180.0;
  return p;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("saturate examples") {
  CHECK(saturate(v2(3, 4), 10).isApprox(v2(3, 4)));
  CHECK(saturate(v2(6, 8), 5).isApprox(v2(3, 4)));
  CHECK(saturate(v2(0, 0), 1).isZero());
}

TEST_CASE("saturate bounds norm and preserves direction") {
  std::mt19937 rng(3);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec u = v2(nd(rng), nd(rng));
    const double u0 = 0.1 + std::abs(nd(rng));
    const Vec s = saturate(u, u0);
    CHECK(s.norm() <= u0 * (1 + 1e-15));
    if (u.norm() <= u0) CHECK(s == u);
    CHECK(s.dot(u) >= 0.0);
    CHECK(std::abs(s(0) * u(1) - s(1) * u(0)) <= 1e-12 * (1 + u.squaredNorm()));
  }
}

TEST_CASE("plant derivative examples") {
  CHECK(plant_derivative(obstacle_plant(), v2(1, 0), v2(0, 0)).isApprox(v2(-2, 0)));
  CHECK(plant_derivative(obstacle_plant(), v2(0, 0), v2(0, 0)).isZero());
  const Vec d = plant_derivative(missile_plant(), v2(0.1, 0), Vec::Zero(1));
  CHECK(d(0) == doctest::Approx(-0.1050840).epsilon(1e-12));
  CHECK(d(1) == doctest::Approx(-8.270520).epsilon(1e-12));
  CHECK_THROWS_AS(plant_derivative(obstacle_plant(), Vec::Zero(3), v2(0, 0)), std::invalid_argument);
}

TEST_CASE("plant derivative saturates the input") {
  const Vec d = plant_derivative(obstacle_plant(), v2(0, 0), v2(60, 80));
  CHECK(d.isApprox(0.8 * v2(6, 8)));
}

TEST_CASE("ideal gains") {
  const auto g = ideal_gains(obstacle_plant(), -Mat::Identity(2, 2), -Mat::Identity(2, 2));
  CHECK(g.theta_x_star.isApprox(1.25 * Mat::Identity(2, 2)));
  CHECK(g.theta_r_star.isApprox(-1.25 * Mat::Identity(2, 2)));

  UncertainPlant p = obstacle_plant();
  const auto same = ideal_gains(p, p.A_p, p.B_p * p.Lambda);
  CHECK(same.theta_x_star.norm() < 1e-14);
  CHECK(same.theta_r_star.isApprox(Mat::Identity(2, 2)));

  UncertainPlant single{-Mat::Identity(2, 2), Mat(2, 1), Mat::Identity(1, 1), 1.0};
  single.B_p << 1, 0;
  Mat am = -Mat::Identity(2, 2);
  am(1, 0) = 0.5;
  try {
    ideal_gains(single, am, single.B_p);
    FAIL("expected matching failure");
  } catch (const MatchingError& e) {
    CHECK(std::string(e.what()).find("matching condition violated") != std::string::npos);
    CHECK(e.residual_x() == doctest::Approx(0.5));
  }
}

TEST_CASE("ideal gains restate matching") {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    UncertainPlant p{Mat::Random(3, 3), Mat::Random(3, 3), Mat::Identity(3, 3), 1.0};
    p.Lambda.diagonal() << 0.5 + std::abs(nd(rng)), 0.5 + std::abs(nd(rng)), 0.5 + std::abs(nd(rng));
    const Mat am = Mat::Random(3, 3);
    const Mat bm = Mat::Random(3, 2);
    const auto g = ideal_gains(p, am, bm);
    CHECK((p.A_p + p.B_p * p.Lambda * g.theta_x_star - am).norm() <= 1e-8);
    CHECK((p.B_p * p.Lambda * g.theta_r_star - bm).norm() <= 1e-8);
  }
}

TEST_CASE("plant validation") {
  UncertainPlant p = obstacle_plant();
  CHECK_NOTHROW(p.validate());
  p.Lambda(0, 1) = 0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = obstacle_plant();
  p.Lambda(1, 1) = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = obstacle_plant();
  p.u0 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
