#pragma once

#include "pirrt/rng.hpp"
#include "pirrt/types.hpp"

#include <functional>
#include <string>

namespace pirrt {

/// Control-affine stochastic dynamics
///
///   dx = f(x) dt + B(x) (u dt + alpha dw),   |rho| = 1 / alpha^2.
///
/// f writes an n-vector, B writes an n x m matrix; both are evaluated in
/// place so rollouts do not allocate per step.
class DynamicsModel {
 public:
  using DriftFn = std::function<void(const ConstVectorRef& x, VectorRef out)>;
  using ControlMatrixFn = std::function<void(const ConstVectorRef& x, MatrixRef out)>;

  DynamicsModel(Index state_dim, Index control_dim, DriftFn drift, ControlMatrixFn control_matrix,
                double noise_scale, std::string name = "custom");

  Index state_dim() const { return state_dim_; }
  Index control_dim() const { return control_dim_; }
  const std::string& name() const { return name_; }

  /// alpha; equals 1/sqrt(|rho|).
  double noise_scale() const { return alpha_; }
  /// |rho| = 1/alpha^2; +inf for the noise-free model.
  double rho_magnitude() const { return rho_; }

  void drift(const ConstVectorRef& x, VectorRef out) const { drift_(x, out); }
  void control_matrix(const ConstVectorRef& x, MatrixRef out) const { control_matrix_(x, out); }
  Vector drift(const ConstVectorRef& x) const;
  Matrix control_matrix(const ConstVectorRef& x) const;

  /// Same dynamics, different noise intensity.
  DynamicsModel with_noise_scale(double alpha) const;

 private:
  Index state_dim_;
  Index control_dim_;
  DriftFn drift_;
  ControlMatrixFn control_matrix_;
  double alpha_;
  double rho_;
  std::string name_;
};

/// One explicit Euler-Maruyama step:
///   x + f(x) dt + B(x) (u dt + alpha dw).
Vector step_once(const DynamicsModel& model, const ConstVectorRef& x, const ConstVectorRef& u,
                 const ConstVectorRef& dw, double dt);

/// Integrates the schedule/noise pair from (x0, t0). Times are t0 + i*dt.
Trajectory rollout(const DynamicsModel& model, const ConstVectorRef& x0, double t0,
                   const ControlSchedule& schedule, const NoiseProfile& noise);

/// steps x channels independent N(0, dt) increments drawn in step-major order.
NoiseProfile sample_noise(RngStream& rng, Index steps, Index channels, double dt);

}  // namespace pirrt
