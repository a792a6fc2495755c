#pragma once

#include "pirrt/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace pirrt {

/// log(sum(exp(v))) with max-shift stabilisation; -inf for all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar shift = v.maxCoeff();
  if (!std::isfinite(shift)) return shift;
  return shift + std::log((v.derived().array() - shift).exp().sum());
}

/// State cost J = Phi(x(t_f)) + integral of q, with a collision sentinel.
struct CostFunctional {
  std::function<double(const ConstVectorRef& x)> terminal;          // Phi
  std::function<double(const ConstVectorRef& x, double t)> running;  // q; empty means 0
  std::function<bool(const Trajectory&)> collides;                   // empty means never
  double collision_penalty = kInfinity;

  double terminal_cost(const ConstVectorRef& x) const { return terminal ? terminal(x) : 0.0; }
  double running_cost(const ConstVectorRef& x, double t) const { return running ? running(x, t) : 0.0; }
  bool in_collision(const Trajectory& traj) const { return collides && collides(traj); }
};

/// S = J + eta, with eta split into its quadratic and noise-cross parts.
struct PathCostBreakdown {
  double state_cost = 0.0;         // Phi(x_K) + sum q_i dt
  double control_quadratic = 0.0;  // 1/2 sum u_i'u_i dt
  double noise_cross = 0.0;        // (1/sqrt|rho|) sum u_i'dw_i
  double total = 0.0;
};

struct DesirabilityWeights {
  Vector weights;        // probability vector
  Vector log_costs;      // |rho| S_k
  double normalization;  // |rho| min S, the shift removed before exponentiating
};

struct FreeEnergyEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  Index samples = 0;
  Index finite_samples = 0;
};

struct DualityGap {
  double gap = 0.0;
  bool violated = false;
};

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
  Index count = 0;
};

SampleMoments summarize(std::span<const double> samples);

/**
 * Left-endpoint quadrature of the sampled path cost
 *
 *   S = Phi(x_K) + sum_i q(x_i, t_i) dt + 1/2 sum_i u_i'u_i dt
 *       + (1/sqrt|rho|) sum_i u_i'dw_i.
 *
 * The controls and increments are read from the trajectory itself. A
 * colliding trajectory gets state_cost and total equal to the penalty.
 */
PathCostBreakdown path_cost(const Trajectory& traj, const CostFunctional& cost, double rho_magnitude);

/// Cost-to-go S_i for every step i = 0..K-1: Phi(x_K) plus the per-step
/// running, quadratic and cross terms from i onward. All +inf on collision.
Vector cost_to_go(const Trajectory& traj, const CostFunctional& cost, double rho_magnitude);

/// Softmax of -|rho| S. Infinite costs get weight exactly 0; |rho| = +inf
/// puts uniform mass on the minimisers.
DesirabilityWeights desirability_weights(const ConstVectorRef& costs, double rho_magnitude);
DesirabilityWeights desirability_weights(std::span<const double> costs, double rho_magnitude);

/// Column i of the result is the weight vector for step i, from column i of
/// the M x K cost-to-go matrix.
Matrix step_weights(const ConstMatrixRef& costs_to_go, double rho_magnitude);

/// delta u_i = (1/sqrt|rho|) (1/dt) sum_k p_ik dw_i(k). weights is M x K
/// (one column per step) or M x 1 (whole-path weights for every step).
ControlSchedule control_correction(const ConstMatrixRef& weights, std::span<const NoiseProfile> noises,
                                   double rho_magnitude);
ControlSchedule control_correction(const DesirabilityWeights& weights,
                                   std::span<const NoiseProfile> noises, double rho_magnitude);

/// u_PI = clamp(u_base + delta u).
ControlSchedule compose_policy(const ControlSchedule& baseline, const ControlSchedule& delta,
                               const ControlBounds& bounds);

/// Elementwise clamp to the box.
ControlSchedule clamp_schedule(const ControlSchedule& schedule, const ControlBounds& bounds);

/**
 * xi = -(1/|rho|) log mean exp(-|rho| S_k), with a delta-method standard
 * error. Infinite costs contribute exp(-inf) = 0 but still count in N.
 */
FreeEnergyEstimate free_energy_estimate(std::span<const double> costs, double rho_magnitude);

/// gap = mean - xi; violated only when gap < -3 se.
DualityGap duality_gap(double free_energy, double total_cost_mean, double total_cost_se);

}  // namespace pirrt
