#include "pirrt/path_integral.hpp"

#include <algorithm>
#include <cmath>

namespace pirrt {

namespace {

double noise_factor(double rho_magnitude) {
  if (!(rho_magnitude > 0.0)) throw ContractError("|rho| must be positive");
  return std::isinf(rho_magnitude) ? 0.0 : 1.0 / std::sqrt(rho_magnitude);
}

void check_aligned(const Trajectory& traj) {
  if (traj.noise.steps() != traj.steps() || traj.size() != traj.steps() + 1 ||
      traj.times.size() != traj.size())
    throw ContractError("path cost: trajectory, controls and noise are misaligned");
  if (traj.noise.channels() != traj.controls.channels() && traj.steps() > 0)
    throw ContractError("path cost: control and noise channel counts differ");
}

}  // namespace

SampleMoments summarize(std::span<const double> samples) {
  SampleMoments m;
  m.count = static_cast<Index>(samples.size());
  if (samples.empty()) return m;
  double sum = 0.0;
  for (double s : samples) sum += s;
  m.mean = sum / static_cast<double>(m.count);
  if (m.count > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - m.mean) * (s - m.mean);
    m.variance = ss / static_cast<double>(m.count - 1);
    m.standard_error = std::sqrt(m.variance / static_cast<double>(m.count));
  }
  return m;
}

PathCostBreakdown path_cost(const Trajectory& traj, const CostFunctional& cost, double rho_magnitude) {
  check_aligned(traj);
  const double sigma = noise_factor(rho_magnitude);
  const double dt = traj.dt();

  PathCostBreakdown out;
  if (cost.in_collision(traj)) {
    out.state_cost = cost.collision_penalty;
  } else {
    double running = 0.0;
    if (cost.running)
      for (Index i = 0; i < traj.steps(); ++i) running += cost.running(traj.states.col(i), traj.times(i)) * dt;
    out.state_cost = cost.terminal_cost(traj.states.col(traj.size() - 1)) + running;
  }
  double quad = 0.0;
  double cross = 0.0;
  for (Index i = 0; i < traj.steps(); ++i) {
    const auto u = traj.controls.values.col(i);
    quad += u.squaredNorm() * dt;
    cross += u.dot(traj.noise.increments.col(i));
  }
  out.control_quadratic = 0.5 * quad;
  out.noise_cross = sigma * cross;
  out.total = out.state_cost + out.control_quadratic + out.noise_cross;
  return out;
}

Vector cost_to_go(const Trajectory& traj, const CostFunctional& cost, double rho_magnitude) {
  check_aligned(traj);
  const double sigma = noise_factor(rho_magnitude);
  const double dt = traj.dt();
  const Index steps = traj.steps();
  Vector out(steps);
  if (cost.in_collision(traj)) {
    out.setConstant(cost.collision_penalty);
    return out;
  }
  double acc = cost.terminal_cost(traj.states.col(traj.size() - 1));
  for (Index i = steps - 1; i >= 0; --i) {
    const auto u = traj.controls.values.col(i);
    acc += cost.running_cost(traj.states.col(i), traj.times(i)) * dt + 0.5 * u.squaredNorm() * dt +
           sigma * u.dot(traj.noise.increments.col(i));
    out(i) = acc;
  }
  return out;
}

DesirabilityWeights desirability_weights(const ConstVectorRef& costs, double rho_magnitude) {
  if (costs.size() < 1) throw ContractError("desirability_weights: need at least one cost");
  if (!(rho_magnitude > 0.0)) throw ContractError("desirability_weights: |rho| must be positive");
  for (Index k = 0; k < costs.size(); ++k)
    if (std::isnan(costs(k)) || costs(k) == -kInfinity)
      throw ContractError("desirability_weights: costs must be finite or +inf");

  const double s_min = costs.minCoeff();
  if (!std::isfinite(s_min)) throw NoViableSample("desirability_weights: every sample is infeasible");

  DesirabilityWeights out;
  out.weights.resize(costs.size());
  out.log_costs.resize(costs.size());
  if (std::isinf(rho_magnitude)) {
    out.normalization = 0.0;
    Index winners = 0;
    for (Index k = 0; k < costs.size(); ++k) {
      const bool best = costs(k) == s_min;
      out.log_costs(k) = best ? 0.0 : kInfinity;
      winners += best ? 1 : 0;
    }
    for (Index k = 0; k < costs.size(); ++k)
      out.weights(k) = costs(k) == s_min ? 1.0 / static_cast<double>(winners) : 0.0;
    return out;
  }

  out.normalization = rho_magnitude * s_min;
  double sum = 0.0;
  for (Index k = 0; k < costs.size(); ++k) {
    out.log_costs(k) = rho_magnitude * costs(k);
    // Differences are taken before scaling so a common shift cancels exactly.
    const double d = std::isinf(costs(k)) ? 0.0 : std::exp(-rho_magnitude * (costs(k) - s_min));
    out.weights(k) = d;
    sum += d;
  }
  out.weights /= sum;
  return out;
}

DesirabilityWeights desirability_weights(std::span<const double> costs, double rho_magnitude) {
  const Eigen::Map<const Vector> view(costs.data(), static_cast<Index>(costs.size()));
  return desirability_weights(view, rho_magnitude);
}

Matrix step_weights(const ConstMatrixRef& costs_to_go, double rho_magnitude) {
  Matrix out(costs_to_go.rows(), costs_to_go.cols());
  for (Index i = 0; i < costs_to_go.cols(); ++i)
    out.col(i) = desirability_weights(Vector(costs_to_go.col(i)), rho_magnitude).weights;
  return out;
}

ControlSchedule control_correction(const ConstMatrixRef& weights, std::span<const NoiseProfile> noises,
                                   double rho_magnitude) {
  const Index samples = static_cast<Index>(noises.size());
  if (samples < 1) throw ContractError("control_correction: need at least one noise profile");
  if (weights.rows() != samples) throw ContractError("control_correction: weight count differs from M");
  const Index steps = noises.front().steps();
  const Index channels = noises.front().channels();
  const double dt = noises.front().dt;
  for (const auto& n : noises)
    if (n.steps() != steps || n.channels() != channels || n.dt != dt)
      throw ContractError("control_correction: noise profiles disagree on shape or dt");
  if (weights.cols() != 1 && weights.cols() != steps)
    throw ContractError("control_correction: weights must have 1 or K columns");

  const double scale = noise_factor(rho_magnitude) / dt;
  ControlSchedule delta = ControlSchedule::zeros(channels, steps, dt);
  for (Index i = 0; i < steps; ++i) {
    const Index wcol = weights.cols() == 1 ? 0 : i;
    for (Index k = 0; k < samples; ++k)
      delta.values.col(i) += weights(k, wcol) * noises[static_cast<std::size_t>(k)].increments.col(i);
    delta.values.col(i) *= scale;
  }
  return delta;
}

ControlSchedule control_correction(const DesirabilityWeights& weights,
                                   std::span<const NoiseProfile> noises, double rho_magnitude) {
  return control_correction(ConstMatrixRef(weights.weights), noises, rho_magnitude);
}

ControlSchedule clamp_schedule(const ControlSchedule& schedule, const ControlBounds& bounds) {
  if (bounds.lower.size() != schedule.channels() || bounds.upper.size() != schedule.channels())
    throw ContractError("clamp_schedule: bounds dimension");
  ControlSchedule out = schedule;
  for (Index i = 0; i < out.steps(); ++i)
    out.values.col(i) = out.values.col(i).cwiseMax(bounds.lower).cwiseMin(bounds.upper);
  return out;
}

ControlSchedule compose_policy(const ControlSchedule& baseline, const ControlSchedule& delta,
                               const ControlBounds& bounds) {
  if (baseline.steps() != delta.steps() || baseline.channels() != delta.channels())
    throw ContractError("compose_policy: baseline and correction lengths differ");
  ControlSchedule out{baseline.values + delta.values, baseline.dt};
  return clamp_schedule(out, bounds);
}

FreeEnergyEstimate free_energy_estimate(std::span<const double> costs, double rho_magnitude) {
  if (costs.empty()) throw ContractError("free_energy_estimate: need at least one sample");
  if (!(rho_magnitude > 0.0)) throw ContractError("free_energy_estimate: |rho| must be positive");
  FreeEnergyEstimate out;
  out.samples = static_cast<Index>(costs.size());
  double s_min = kInfinity;
  for (double s : costs) {
    if (std::isnan(s)) throw ContractError("free_energy_estimate: NaN cost");
    if (std::isfinite(s)) ++out.finite_samples;
    s_min = std::min(s_min, s);
  }
  if (out.finite_samples == 0) throw NoViableSample("free_energy_estimate: every sample is infinite");
  if (std::isinf(rho_magnitude)) {
    out.value = s_min;
    return out;
  }

  // mean of d_k = exp(-|rho| (S_k - S_min)); xi = S_min - log(mean)/|rho|.
  const double n = static_cast<double>(out.samples);
  double sum = 0.0;
  for (double s : costs) sum += std::isinf(s) ? 0.0 : std::exp(-rho_magnitude * (s - s_min));
  const double mean = sum / n;
  double ss = 0.0;
  for (double s : costs) {
    const double d = std::isinf(s) ? 0.0 : std::exp(-rho_magnitude * (s - s_min));
    ss += (d - mean) * (d - mean);
  }
  out.value = s_min - std::log(mean) / rho_magnitude;
  if (out.samples > 1) {
    const double se_mean = std::sqrt(ss / (n - 1.0) / n);
    out.standard_error = se_mean / (mean * rho_magnitude);
  }
  return out;
}

DualityGap duality_gap(double free_energy, double total_cost_mean, double total_cost_se) {
  if (!std::isfinite(free_energy) || !std::isfinite(total_cost_mean) || !std::isfinite(total_cost_se))
    throw ContractError("duality_gap: inputs must be finite");
  DualityGap out;
  out.gap = total_cost_mean - free_energy;
  out.violated = out.gap < -3.0 * total_cost_se;
  return out;
}

}  // namespace pirrt
