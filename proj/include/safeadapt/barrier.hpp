#pragma once

#include <functional>
#include <string>

#include "safeadapt/numerics.hpp"

namespace safeadapt {

/// Axis-aligned box used to bound Lipschitz constants of quadratic barriers.
struct Box {
  Vec lo;
  Vec hi;
};

struct BarrierSpec {
  std::string kind;
  std::function<double(const Vec&)> h;
  std::function<Vec(const Vec&)> grad;
  double kappa1 = 0.0;  // Lipschitz constant of grad
  double kappa2 = 0.0;  // Lipschitz constant of h on the domain box
  Box domain;
};

struct EbrParams {
  double gamma0 = 1.0;
  double epsilon = 5.0;
  double Delta = 0.01;

  /// Throws std::invalid_argument when gamma0 < 0, epsilon < 0 or Delta <= 0.
  void validate() const;
};

/// h = |p - c|^2 - r^2 on the first two state coordinates.
BarrierSpec circle_barrier(double xo, double yo, double radius, const Box& domain);

/// h = alpha_max - x_0.
BarrierSpec halfspace_barrier(double alpha_max, std::size_t n = 2);

/// gamma0 * exp(-(epsilon * e_h)^2)
double ebr_gamma(const EbrParams& p, double e_h);

/// True iff h_dot >= -gamma * h_val to within 1e-9.
bool zbf_check(const BarrierSpec& b, double h_dot, double gamma, double h_val);

}  // namespace safeadapt
