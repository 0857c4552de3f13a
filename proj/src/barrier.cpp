#include "safeadapt/barrier.hpp"

#include <cmath>
#include <stdexcept>

namespace safeadapt {

void EbrParams::validate() const {
  if (!(gamma0 >= 0.0)) throw std::invalid_argument("ebr: gamma0 must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("ebr: epsilon must be >= 0");
  if (!(Delta > 0.0)) throw std::invalid_argument("ebr: Delta must be > 0");
}

BarrierSpec circle_barrier(double xo, double yo, double radius, const Box& domain) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle_barrier: radius must be positive");
  if (domain.lo.size() < 2 || domain.hi.size() != domain.lo.size()) {
    throw std::invalid_argument("circle_barrier: domain box must cover the position coordinates");
  }
  BarrierSpec b;
  b.kind = "circle";
  const double r2 = radius * radius;
  b.h = [xo, yo, r2](const Vec& x) {
    const double dx = x(0) - xo;
    const double dy = x(1) - yo;
    return dx * dx + dy * dy - r2;
  };
  b.grad = [xo, yo](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(0) = 2.0 * (x(0) - xo);
    g(1) = 2.0 * (x(1) - yo);
    return g;
  };
  b.kappa1 = 2.0;
  // |grad| is convex, so its sup over the box sits at a corner.
  const double fx = std::max(std::abs(domain.lo(0) - xo), std::abs(domain.hi(0) - xo));
  const double fy = std::max(std::abs(domain.lo(1) - yo), std::abs(domain.hi(1) - yo));
  b.kappa2 = 2.0 * std::hypot(fx, fy);
  b.domain = domain;
  return b;
}

BarrierSpec halfspace_barrier(double alpha_max, std::size_t n) {
  if (n < 1) throw std::invalid_argument("halfspace_barrier: state dimension must be >= 1");
  BarrierSpec b;
  b.kind = "halfspace";
  b.h = [alpha_max](const Vec& x) { return alpha_max - x(0); };
  b.grad = [](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(0) = -1.0;
    return g;
  };
  b.kappa1 = 0.0;
  b.kappa2 = 1.0;
  const auto dim = static_cast<Eigen::Index>(n);
  b.domain = Box{Vec::Constant(dim, -1.0), Vec::Constant(dim, 1.0)};
  return b;
}

double ebr_gamma(const EbrParams& p, double e_h) {
  const double z = p.epsilon * e_h;
  return p.gamma0 * std::exp(-z * z);
}

bool zbf_check(const BarrierSpec&, double h_dot, double gamma, double h_val) {
  return h_dot >= -gamma * h_val - 1e-9;
}

}  // namespace safeadapt
