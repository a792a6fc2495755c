#include "pirrt/sde.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace pirrt {

namespace {

void require_finite(const ConstVectorRef& v, const char* what) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite " << what << ": [" << v.transpose() << "]";
    throw NonFiniteError(msg.str());
  }
}

struct StepWorkspace {
  Vector f;
  Matrix b;
  Vector channel;

  explicit StepWorkspace(const DynamicsModel& model)
      : f(model.state_dim()),
        b(model.state_dim(), model.control_dim()),
        channel(model.control_dim()) {}
};

// Writes the next state into out. The finiteness checks bracket every step.
void advance(const DynamicsModel& model, const ConstVectorRef& x, const ConstVectorRef& u,
             const ConstVectorRef& dw, double dt, StepWorkspace& ws, VectorRef out) {
  model.drift(x, ws.f);
  model.control_matrix(x, ws.b);
  ws.channel.noalias() = u * dt + model.noise_scale() * dw;
  out = x + ws.f * dt;
  out.noalias() += ws.b * ws.channel;
  if (!out.allFinite()) {
    std::ostringstream msg;
    msg << "Euler-Maruyama step produced non-finite state from x = [" << x.transpose() << "]";
    throw NonFiniteError(msg.str());
  }
}

}  // namespace

DynamicsModel::DynamicsModel(Index state_dim, Index control_dim, DriftFn drift,
                             ControlMatrixFn control_matrix, double noise_scale, std::string name)
    : state_dim_(state_dim),
      control_dim_(control_dim),
      drift_(std::move(drift)),
      control_matrix_(std::move(control_matrix)),
      alpha_(noise_scale),
      rho_(noise_scale > 0.0 ? 1.0 / (noise_scale * noise_scale) : kInfinity),
      name_(std::move(name)) {
  if (state_dim_ <= 0 || control_dim_ <= 0)
    throw ContractError("DynamicsModel: state and control dimensions must be positive");
  if (control_dim_ > state_dim_)
    throw ContractError("DynamicsModel: control dimension must not exceed state dimension");
  if (!drift_ || !control_matrix_) throw ContractError("DynamicsModel: drift and B are required");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
    throw ContractError("DynamicsModel: noise scale must be finite and >= 0");
}

Vector DynamicsModel::drift(const ConstVectorRef& x) const {
  Vector out(state_dim_);
  drift_(x, out);
  return out;
}

Matrix DynamicsModel::control_matrix(const ConstVectorRef& x) const {
  Matrix out(state_dim_, control_dim_);
  control_matrix_(x, out);
  return out;
}

DynamicsModel DynamicsModel::with_noise_scale(double alpha) const {
  return DynamicsModel(state_dim_, control_dim_, drift_, control_matrix_, alpha, name_);
}

Vector step_once(const DynamicsModel& model, const ConstVectorRef& x, const ConstVectorRef& u,
                 const ConstVectorRef& dw, double dt) {
  if (x.size() != model.state_dim() || u.size() != model.control_dim() ||
      dw.size() != model.control_dim())
    throw ContractError("step_once: dimension mismatch");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("step_once: dt must be positive");
  require_finite(x, "state");
  require_finite(u, "control");
  require_finite(dw, "noise increment");
  StepWorkspace ws(model);
  Vector out(model.state_dim());
  advance(model, x, u, dw, dt, ws, out);
  return out;
}

Trajectory rollout(const DynamicsModel& model, const ConstVectorRef& x0, double t0,
                   const ControlSchedule& schedule, const NoiseProfile& noise) {
  const Index steps = schedule.steps();
  if (noise.steps() != steps) throw ContractError("rollout: schedule and noise lengths differ");
  if (x0.size() != model.state_dim()) throw ContractError("rollout: initial state dimension");
  if (schedule.channels() != model.control_dim() || noise.channels() != model.control_dim())
    throw ContractError("rollout: channel count does not match control dimension");
  if (!(schedule.dt > 0.0)) throw ContractError("rollout: dt must be positive");
  if (steps > 0 && schedule.dt != noise.dt) throw ContractError("rollout: schedule and noise dt differ");
  require_finite(x0, "initial state");
  if (!schedule.values.allFinite()) throw NonFiniteError("rollout: non-finite control schedule");
  if (!noise.increments.allFinite()) throw NonFiniteError("rollout: non-finite noise profile");

  Trajectory traj;
  traj.controls = schedule;
  traj.noise = noise;
  traj.noise.dt = schedule.dt;
  traj.states.resize(model.state_dim(), steps + 1);
  traj.times.resize(steps + 1);
  traj.states.col(0) = x0;
  traj.times(0) = t0;

  StepWorkspace ws(model);
  for (Index i = 0; i < steps; ++i) {
    advance(model, traj.states.col(i), schedule.values.col(i), noise.increments.col(i),
            schedule.dt, ws, traj.states.col(i + 1));
    traj.times(i + 1) = t0 + static_cast<double>(i + 1) * schedule.dt;
  }
  return traj;
}

NoiseProfile sample_noise(RngStream& rng, Index steps, Index channels, double dt) {
  if (steps < 1) throw ContractError("sample_noise: steps must be >= 1");
  if (channels < 1) throw ContractError("sample_noise: channels must be >= 1");
  if (!(dt > 0.0)) throw ContractError("sample_noise: dt must be positive");
  NoiseProfile noise;
  noise.dt = dt;
  noise.seed_tag = rng.seed_tag();
  noise.increments.resize(channels, steps);
  const double scale = std::sqrt(dt);
  for (Index i = 0; i < steps; ++i)
    for (Index c = 0; c < channels; ++c) noise.increments(c, i) = scale * rng.normal();
  return noise;
}

}  // namespace pirrt
