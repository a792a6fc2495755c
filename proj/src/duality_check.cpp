#include "pirrt/duality_check.hpp"

#include "pirrt/rng.hpp"

#include <cmath>

namespace pirrt {

DynamicsModel integrator_model(double rho) {
  if (!(rho > 0.0)) throw ContractError("integrator_model: rho must be positive");
  return DynamicsModel(
      1, 1, [](const ConstVectorRef&, VectorRef f) { f.setZero(); },
      [](const ConstVectorRef&, MatrixRef b) { b.setOnes(); }, 1.0 / std::sqrt(rho), "integrator");
}

CostFunctional half_square_cost() {
  CostFunctional c;
  c.terminal = [](const ConstVectorRef& x) { return 0.5 * x.squaredNorm(); };
  return c;
}

double quadratic_toy_free_energy(double x0, double rho, double t_final) {
  // E[exp(-a x^2)] for x ~ N(m, s^2) is exp(-a m^2 / k) / sqrt(k), k = 1 + 2 a s^2.
  const double a = 0.5 * rho;
  const double s2 = t_final / rho;
  const double k = 1.0 + 2.0 * a * s2;
  return (a * x0 * x0 / k + 0.5 * std::log(k)) / rho;
}

bool DualityReport::bound_holds() const {
  for (const PolicyCheck& p : policies)
    if (p.gap.violated) return false;
  return true;
}

DualityReport check_duality(const QuadraticToy& toy) {
  if (toy.samples < 2) throw ContractError("check_duality: need at least two samples");
  const DynamicsModel model = integrator_model(toy.rho);
  const CostFunctional cost = half_square_cost();
  const Index steps = steps_between(0.0, toy.t_final, toy.dt);
  const Vector x0 = Vector::Constant(1, toy.x0);
  const StreamKey key{toy.seed, 0, 0};

  const auto sample_costs = [&](double u, std::uint64_t stream) {
    const ControlSchedule schedule{Matrix::Constant(1, steps, u), toy.dt};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(toy.samples));
    for (Index k = 0; k < toy.samples; ++k) {
      RngStream rng(key, StreamRole::Generic, stream * static_cast<std::uint64_t>(toy.samples) + k);
      const Trajectory t = rollout(model, x0, 0.0, schedule, sample_noise(rng, steps, 1, toy.dt));
      const PathCostBreakdown b = path_cost(t, cost, toy.rho);
      out.push_back(b.state_cost + b.control_quadratic);
    }
    return out;
  };

  DualityReport r;
  r.estimate = free_energy_estimate(sample_costs(0.0, 0), toy.rho);
  r.exact = quadratic_toy_free_energy(toy.x0, toy.rho, toy.t_final);
  r.relative_error = std::abs(r.estimate.value - r.exact) / std::abs(r.exact);
  for (std::size_t p = 0; p < toy.policies.size(); ++p) {
    PolicyCheck c;
    c.control = toy.policies[p];
    const auto costs = sample_costs(c.control, p + 1);
    c.cost = summarize(costs);
    c.gap = duality_gap(r.estimate.value, c.cost.mean, c.cost.standard_error);
    r.policies.push_back(c);
  }
  return r;
}

}  // namespace pirrt
