#pragma once

#include "pirrt/path_integral.hpp"
#include "pirrt/sde.hpp"

#include <cstdint>
#include <vector>

namespace pirrt {

/// Scalar toy problem dx = u dt + dw / sqrt(rho), Phi(x) = x^2 / 2, q = 0.
struct QuadraticToy {
  double rho = 4.0;
  double x0 = 1.0;
  double t_final = 1.0;
  double dt = 0.01;
  Index samples = 100000;
  std::uint64_t seed = 1;
  std::vector<double> policies{-1.0, -0.5, 0.0, 0.5, 1.0};  // constant test controls
};

DynamicsModel integrator_model(double rho);
CostFunctional half_square_cost();

/// Exact xi for the toy: x(t_f) ~ N(x0, t_f / rho) in closed form.
double quadratic_toy_free_energy(double x0, double rho, double t_final);

struct PolicyCheck {
  double control = 0.0;
  SampleMoments cost;  // Phi + 1/2 int u^2 dt under the policy
  DualityGap gap;
};

struct DualityReport {
  FreeEnergyEstimate estimate;  // from unforced rollouts
  double exact = 0.0;
  double relative_error = 0.0;
  std::vector<PolicyCheck> policies;

  bool bound_holds() const;
  bool passed(double relative_tolerance = 0.02) const { return bound_holds() && relative_error <= relative_tolerance; }
};

DualityReport check_duality(const QuadraticToy& toy);

}  // namespace pirrt
