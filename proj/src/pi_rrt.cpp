#include "pirrt/pi_rrt.hpp"

#include <chrono>
#include <utility>

namespace pirrt {

std::string_view to_string(Algorithm a) { return a == Algorithm::Rrt ? "rrt" : "pirrt"; }

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "rrt" || name == "RRT") return Algorithm::Rrt;
  if (name == "pirrt" || name == "pi-rrt" || name == "PI-RRT") return Algorithm::PiRrt;
  throw ContractError("unknown algorithm: " + std::string(name));
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Collision: return "collision";
    case Outcome::GoalMiss: return "goal_miss";
    case Outcome::Timeout: return "timeout";
  }
  return "unknown";
}

CostFunctional goal_cost(const Environment& env, double terminal_weight) {
  CostFunctional c;
  const GoalSet goal = env.goal();
  c.terminal = [goal, terminal_weight](const ConstVectorRef& x) {
    const double dx = x(0) - goal.center_x;
    const double dy = x(1) - goal.center_y;
    return terminal_weight * (dx * dx + dy * dy);
  };
  c.collides = [&env](const Trajectory& t) { return !obstacle_free(t, env); };
  return c;
}

namespace {

void append(Trajectory& acc, const Trajectory& seg) {
  if (acc.size() == 0) {
    acc = seg;
    return;
  }
  const Index k = seg.steps();
  const Index n0 = acc.size();
  const Index s0 = acc.steps();
  acc.states.conservativeResize(Eigen::NoChange, n0 + k);
  acc.states.rightCols(k) = seg.states.rightCols(k);
  acc.times.conservativeResize(n0 + k);
  acc.times.tail(k) = seg.times.tail(k);
  acc.controls.values.conservativeResize(Eigen::NoChange, s0 + k);
  acc.controls.values.rightCols(k) = seg.controls.values;
  acc.noise.increments.conservativeResize(Eigen::NoChange, s0 + k);
  acc.noise.increments.rightCols(k) = seg.noise.increments;
}

Trajectory head(const Trajectory& t, Index steps) {
  Trajectory out;
  out.states = t.states.leftCols(steps + 1);
  out.times = t.times.head(steps + 1);
  out.controls = {t.controls.values.leftCols(steps), t.controls.dt};
  out.noise = {t.noise.increments.leftCols(steps), t.noise.dt, t.noise.seed_tag};
  return out;
}

Trajectory tail_from(const Trajectory& t, Index first) {
  const Index steps = t.steps() - first;
  Trajectory out;
  out.states = t.states.rightCols(steps + 1);
  out.times = t.times.tail(steps + 1);
  out.controls = {t.controls.values.rightCols(steps), t.controls.dt};
  out.noise = {t.noise.increments.rightCols(steps), t.noise.dt, t.noise.seed_tag};
  return out;
}

// Index of the last point to keep: the first point whose incoming segment
// (or itself, for the start) is in collision. -1 when the whole path is free.
Index first_collision(const Trajectory& t, const Environment& env) {
  if (!env.point_free(t.states(0, 0), t.states(1, 0))) return 0;
  for (Index i = 0; i + 1 < t.size(); ++i)
    if (!env.segment_free(t.states(0, i), t.states(1, i), t.states(0, i + 1), t.states(1, i + 1))) return i + 1;
  return -1;
}

struct Baseline {
  Trajectory trajectory;
  ControlSchedule controls;
};

// Remaining part of a plan's branch as seen from `current`, padded with zero
// control up to t_final.
Baseline baseline_from_plan(const MissionContext& ctx, const PlanResult& plan, const StateTimePoint& current) {
  const double dt = ctx.params.planner.dt;
  const Index m = ctx.model.control_dim();
  const Index horizon = steps_between(current.time, ctx.t_final, dt);
  const Branch& b = plan.branch;
  const Index offset = std::min(steps_between(b.trajectory.times(0), current.time, dt), b.trajectory.steps());
  const Index used = std::min(b.trajectory.steps() - offset, horizon);

  Baseline out;
  out.controls = ControlSchedule::zeros(m, horizon, dt);
  out.controls.values.leftCols(used) = b.feedforward.values.middleCols(offset, used);
  out.controls = clamp_schedule(out.controls, ctx.params.bounds);

  out.trajectory = head(tail_from(b.trajectory, offset), used);
  const Index pad = horizon - used;
  if (pad > 0) {
    const Index last = out.trajectory.size() - 1;
    append(out.trajectory, rollout(ctx.model, out.trajectory.states.col(last), out.trajectory.times(last),
                                   ControlSchedule::zeros(m, pad, dt), NoiseProfile::zeros(m, pad, dt)));
  }
  return out;
}

}  // namespace

std::vector<Trajectory> sample_bundle(const DynamicsModel& model, const StateTimePoint& start,
                                      const ControlSchedule& baseline_controls, Index samples,
                                      const StreamKey& key, Index first_index) {
  if (samples < 1) throw ContractError("sample_bundle: M must be >= 1");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (Index k = 0; k < samples; ++k) {
    RngStream rng(key, StreamRole::Bundle, static_cast<std::uint64_t>(first_index + k));
    auto noise = sample_noise(rng, baseline_controls.steps(), model.control_dim(), baseline_controls.dt);
    out.push_back(rollout(model, start.state, start.time, baseline_controls, noise));
  }
  return out;
}

std::optional<Correction> bundle_correction(std::span<const Trajectory> bundle, const CostFunctional& cost,
                                            double rho_magnitude, WeightingMode mode) {
  const Index samples = static_cast<Index>(bundle.size());
  if (samples < 1) throw ContractError("bundle_correction: empty bundle");
  Correction out;
  out.costs.resize(samples);
  std::vector<NoiseProfile> noises;
  noises.reserve(bundle.size());
  bool any_finite = false;
  for (Index k = 0; k < samples; ++k) {
    const Trajectory& t = bundle[static_cast<std::size_t>(k)];
    out.costs(k) = path_cost(t, cost, rho_magnitude).total;
    any_finite = any_finite || std::isfinite(out.costs(k));
    noises.push_back(t.noise);
  }
  if (!any_finite) return std::nullopt;

  if (mode == WeightingMode::WholePath) {
    const auto w = desirability_weights(ConstVectorRef(out.costs), rho_magnitude);
    out.first_step_weights = w.weights;
    out.delta = control_correction(w, noises, rho_magnitude);
    return out;
  }
  const Index steps = bundle.front().steps();
  Matrix to_go(samples, steps);
  for (Index k = 0; k < samples; ++k)
    to_go.row(k) = cost_to_go(bundle[static_cast<std::size_t>(k)], cost, rho_magnitude).transpose();
  const Matrix w = step_weights(to_go, rho_magnitude);
  out.first_step_weights = steps > 0 ? Vector(w.col(0))
                                     : desirability_weights(ConstVectorRef(out.costs), rho_magnitude).weights;
  out.delta = control_correction(w, noises, rho_magnitude);
  return out;
}

ReplanCycleRecord replan_cycle(const MissionContext& ctx, const StateTimePoint& current, Algorithm algorithm,
                               const StreamKey& key, const PlanResult* cached_plan) {
  const double dt = ctx.params.planner.dt;
  const Index remaining = steps_between(current.time, ctx.t_final, dt);
  if (remaining < 1) throw ContractError("replan_cycle: no time left");
  if (!ctx.env.point_free(current.state(0), current.state(1)))
    throw ContractError("replan_cycle: current state is in collision");

  ReplanCycleRecord rec;
  rec.cycle_index = static_cast<Index>(key.cycle);
  rec.start = current;

  PlanResult fresh;
  if (!cached_plan) {
    fresh = plan(ctx.model, ctx.env, current, ctx.t_final, ctx.params.planner, key);
    cached_plan = &fresh;
  }
  Baseline base = baseline_from_plan(ctx, *cached_plan, current);
  rec.baseline = std::move(base.trajectory);
  rec.baseline_controls = base.controls;
  rec.baseline_reached_goal = cached_plan->branch.reached_goal;
  rec.tree_size = cached_plan->tree.size();
  rec.planner_iterations = cached_plan->iterations;
  if (ctx.params.keep_trees) rec.tree = cached_plan->tree;

  ControlSchedule u = rec.baseline_controls;
  if (algorithm == Algorithm::PiRrt) {
    const Index m_samples = ctx.params.bundle_size;
    rec.bundle_size = m_samples;
    const double rho = ctx.model.rho_magnitude();
    for (Index iter = 0; iter < ctx.params.correction_iterations; ++iter) {
      const Index first = iter * 2 * m_samples;
      auto bundle = sample_bundle(ctx.model, current, u, m_samples, key, first);
      auto corr = bundle_correction(bundle, ctx.cost, rho, ctx.params.weighting);
      if (!corr) {
        rec.warnings.push_back("bundle fully infeasible; resampling");
        bundle = sample_bundle(ctx.model, current, u, m_samples, key, first + m_samples);
        corr = bundle_correction(bundle, ctx.cost, rho, ctx.params.weighting);
      }
      if (!corr) {
        rec.warnings.push_back("bundle fully infeasible after retry; executing baseline control");
        rec.bundle_costs = Vector::Constant(m_samples, kInfinity);
        rec.bundle_weights = Vector::Zero(m_samples);
        if (ctx.params.keep_bundles) rec.bundle = std::move(bundle);
        break;
      }
      u = compose_policy(u, corr->delta, ctx.params.bounds);
      rec.bundle_costs = std::move(corr->costs);
      rec.bundle_weights = std::move(corr->first_step_weights);
      if (ctx.params.keep_bundles) rec.bundle = std::move(bundle);
    }
  }
  rec.u_pi = u;

  const Index n_exec = std::min(ctx.params.execute_steps, remaining);
  RngStream exec_rng(key, StreamRole::Execute);
  auto noise = sample_noise(exec_rng, n_exec, ctx.model.control_dim(), dt);
  rec.executed = rollout(ctx.model, current.state, current.time, ControlSchedule{u.values.leftCols(n_exec), dt},
                         noise);
  return rec;
}

MissionResult run(const MissionContext& ctx, const StateTimePoint& z_init, Algorithm algorithm,
                  const StreamKey& key) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  if (!ctx.env.point_free(z_init.state(0), z_init.state(1)))
    throw ContractError("run_mission: z_init is in collision");
  if (ctx.params.execute_steps < 1) throw ContractError("run_mission: tau must be >= 1");

  const double dt = ctx.params.planner.dt;
  const Index m = ctx.model.control_dim();
  MissionResult out;
  out.algorithm = algorithm;
  out.executed.states = z_init.state;
  out.executed.times = Vector::Constant(1, z_init.time);
  out.executed.controls = ControlSchedule::zeros(m, 0, dt);
  out.executed.noise = NoiseProfile::zeros(m, 0, dt);

  std::optional<PlanResult> once;
  StateTimePoint current = z_init;
  Index done = 0;
  bool collided = false;
  bool timed_out = false;
  for (std::uint64_t cycle = 0; steps_between(current.time, ctx.t_final, dt) >= 1; ++cycle) {
    const StreamKey ck = key.with_cycle(cycle);
    const PlanResult* cached = nullptr;
    if (!ctx.params.replan_each_cycle) {
      if (!once) once = plan(ctx.model, ctx.env, z_init, ctx.t_final, ctx.params.planner, key.with_cycle(0));
      cached = &*once;
    }
    ReplanCycleRecord rec = replan_cycle(ctx, current, algorithm, ck, cached);
    for (Index j = 0; j < rec.executed.size(); ++j)
      rec.executed.times(j) = z_init.time + static_cast<double>(done + j) * dt;

    const Index hit = first_collision(rec.executed, ctx.env);
    if (hit >= 0) {
      rec.executed = head(rec.executed, std::max<Index>(hit, 1));
      collided = true;
    }
    append(out.executed, rec.executed);
    done += rec.executed.steps();
    current = rec.executed.back();
    out.cycles.push_back(std::move(rec));
    if (collided) break;
    const double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    if (elapsed > ctx.params.mission_timeout_s && steps_between(current.time, ctx.t_final, dt) >= 1) {
      timed_out = true;
      break;
    }
  }

  const Index last = out.executed.size() - 1;
  const auto final_state = out.executed.states.col(last);
  if (collided)
    out.outcome = Outcome::Collision;
  else if (timed_out)
    out.outcome = Outcome::Timeout;
  else
    out.outcome = ctx.env.goal().contains(final_state, out.executed.times(last)) ? Outcome::Success
                                                                                  : Outcome::GoalMiss;
  out.corridor = classify_crossing(out.executed, ctx.env);
  out.terminal_cost = ctx.cost.terminal_cost(final_state);
  out.wall_time_s = std::chrono::duration<double>(Clock::now() - started).count();
  return out;
}

MissionResult run_mission(const MissionContext& ctx, const StateTimePoint& z_init, const StreamKey& key) {
  return run(ctx, z_init, Algorithm::PiRrt, key);
}

MissionResult run_rrt_only(const MissionContext& ctx, const StateTimePoint& z_init, const StreamKey& key) {
  return run(ctx, z_init, Algorithm::Rrt, key);
}

}  // namespace pirrt
