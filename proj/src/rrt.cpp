#include "pirrt/rrt.hpp"

#include <cmath>
#include <numbers>

namespace pirrt {

double DistanceMetric::operator()(const ConstVectorRef& xa, double ta, const ConstVectorRef& xb,
                                  double tb) const {
  double pos2 = 0.0;
  double angle = 0.0;
  for (Index i = 0; i < xa.size(); ++i) {
    const double d = xa(i) - xb(i);
    if (i == angle_index)
      angle = std::abs(wrap_angle(d));
    else
      pos2 += d * d;
  }
  return std::sqrt(pos2) + angle_weight * angle + time_weight * std::abs(ta - tb);
}

Index TreeGraph::add_root(StateTimePoint root) {
  if (!vertices_.empty()) throw ContractError("TreeGraph: root already present");
  vertices_.push_back(std::move(root));
  parents_.push_back(-1);
  edges_.emplace_back();
  controls_.emplace_back();
  return 0;
}

Index TreeGraph::add_vertex(Index parent, Trajectory edge, ControlSchedule controls) {
  if (parent < 0 || parent >= size()) throw ContractError("TreeGraph: parent out of range");
  if (edge.size() < 2) throw ContractError("TreeGraph: edge needs at least one step");
  vertices_.push_back(edge.back());
  parents_.push_back(parent);
  edges_.push_back(std::move(edge));
  controls_.push_back(std::move(controls));
  return size() - 1;
}

std::vector<Index> TreeGraph::path_to(Index v) const {
  std::vector<Index> path;
  for (Index cur = v; cur >= 0; cur = parent(cur)) path.push_back(cur);
  return {path.rbegin(), path.rend()};
}

SamplingBox car_sampling_box(const Environment& env, double t_lo, double t_hi) {
  SamplingBox box;
  box.lower = Vector(3);
  box.upper = Vector(3);
  box.lower << env.workspace().x_min, env.workspace().y_min, -std::numbers::pi;
  box.upper << env.workspace().x_max, env.workspace().y_max, std::numbers::pi;
  box.t_lo = t_lo;
  box.t_hi = t_hi;
  return box;
}

StateTimePoint sample_free(RngStream& rng, const SamplingBox& box, const Environment& env,
                           Index rejection_budget) {
  if (box.lower.size() != box.upper.size() || box.lower.size() < 2 || !(box.t_hi > box.t_lo) ||
      !(box.lower.array() <= box.upper.array()).all())
    throw ContractError("sample_free: empty sampling box");
  StateTimePoint z{Vector(box.lower.size()), 0.0};
  for (Index attempt = 0; attempt < rejection_budget; ++attempt) {
    for (Index i = 0; i < z.state.size(); ++i) z.state(i) = rng.uniform(box.lower(i), box.upper(i));
    z.time = rng.uniform_left_open(box.t_lo, box.t_hi);
    if (env.point_free(z.state(0), z.state(1))) return z;
  }
  throw std::runtime_error("sample_free: rejection budget exhausted; free space is empty or tiny");
}

Index nearest(const TreeGraph& tree, const StateTimePoint& z, const DistanceMetric& metric) {
  if (tree.empty()) throw ContractError("nearest: empty tree");
  Index best = 0;
  double best_d = kInfinity;
  const auto& vs = tree.vertices();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double d = metric(vs[i], z);
    if (d < best_d) {
      best_d = d;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

std::vector<Trajectory> steer_candidates(const DynamicsModel& model, const StateTimePoint& from,
                                         Index samples, Index horizon_steps, double dt, double t_final,
                                         RngStream& rng, std::optional<double> feedforward_limit) {
  if (samples < 1) throw ContractError("steer: need at least one sample");
  const Index steps = std::min(horizon_steps, steps_between(from.time, t_final, dt));
  if (steps < 1) throw ContractError("steer: no time left before t_final");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(samples));
  const auto zeros = ControlSchedule::zeros(model.control_dim(), steps, dt);
  for (Index k = 0; k < samples; ++k) {
    auto noise = sample_noise(rng, steps, model.control_dim(), dt);
    if (feedforward_limit && model.noise_scale() > 0.0) {
      const double cap = *feedforward_limit * dt / model.noise_scale();
      noise.increments = noise.increments.cwiseMax(-cap).cwiseMin(cap);
    }
    out.push_back(rollout(model, from.state, from.time, zeros, noise));
  }
  return out;
}

ControlSchedule noise_equivalent_control(const NoiseProfile& noise, double noise_scale) {
  return {noise.increments * (noise_scale / noise.dt), noise.dt};
}

SteerResult steer(const DynamicsModel& model, const StateTimePoint& from, const StateTimePoint& toward,
                  Index samples, Index horizon_steps, double dt, double t_final,
                  const DistanceMetric& metric, RngStream& rng, std::optional<double> feedforward_limit) {
  auto candidates = steer_candidates(model, from, samples, horizon_steps, dt, t_final, rng, feedforward_limit);
  Index best = 0;
  double best_d = kInfinity;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Trajectory& c = candidates[k];
    const Index last = c.size() - 1;
    const double d = metric(c.states.col(last), c.times(last), toward.state, toward.time);
    if (d < best_d) {
      best_d = d;
      best = static_cast<Index>(k);
    }
  }
  SteerResult out;
  out.trajectory = std::move(candidates[static_cast<std::size_t>(best)]);
  out.feedforward = noise_equivalent_control(out.trajectory.noise, model.noise_scale());
  out.chosen = best;
  return out;
}

ExtendResult extend(TreeGraph& tree, const StateTimePoint& z_rand, const ExtendContext& ctx, RngStream& rng) {
  const Index near = nearest(tree, z_rand, ctx.params.metric);
  const StateTimePoint& from = tree.vertex(near);
  if (z_rand.time <= from.time) return {};
  if (steps_between(from.time, ctx.t_final, ctx.params.dt) < 1) return {};
  auto edge = steer(ctx.model, from, z_rand, ctx.params.steer_samples, ctx.params.horizon_steps,
                    ctx.params.dt, ctx.t_final, ctx.params.metric, rng, ctx.params.feedforward_limit);
  if (!obstacle_free(edge.trajectory, ctx.env)) return {};
  const Index v = tree.add_vertex(near, std::move(edge.trajectory), std::move(edge.feedforward));
  return {ExtendStatus::Advanced, v};
}

Branch extract_branch(const TreeGraph& tree, Index leaf, Index control_dim, double dt) {
  Branch b;
  b.vertices = tree.path_to(leaf);
  Index steps = 0;
  for (std::size_t i = 1; i < b.vertices.size(); ++i) steps += tree.edge_trajectory(b.vertices[i]).steps();

  const StateTimePoint& root = tree.vertex(b.vertices.front());
  const Index n = root.state.size();
  Trajectory& t = b.trajectory;
  t.states.resize(n, steps + 1);
  t.times.resize(steps + 1);
  t.controls = ControlSchedule::zeros(control_dim, steps, dt);
  t.noise = NoiseProfile::zeros(control_dim, steps, dt);
  b.feedforward = ControlSchedule::zeros(control_dim, steps, dt);
  t.states.col(0) = root.state;
  t.times(0) = root.time;

  Index at = 0;
  for (std::size_t i = 1; i < b.vertices.size(); ++i) {
    const Trajectory& e = tree.edge_trajectory(b.vertices[i]);
    const Index k = e.steps();
    t.states.middleCols(at + 1, k) = e.states.rightCols(k);
    t.times.segment(at + 1, k) = e.times.tail(k);
    t.controls.values.middleCols(at, k) = e.controls.values;
    t.noise.increments.middleCols(at, k) = e.noise.increments;
    b.feedforward.values.middleCols(at, k) = tree.edge_controls(b.vertices[i]).values;
    if (i == 1) t.noise.seed_tag = e.noise.seed_tag;
    at += k;
  }
  return b;
}

namespace {

double goal_distance(const GoalSet& goal, const StateTimePoint& z, const DistanceMetric& metric) {
  double time_gap = 0.0;
  if (z.time < goal.t_lo) time_gap = goal.t_lo - z.time;
  if (z.time > goal.t_hi) time_gap = z.time - goal.t_hi;
  return goal.distance_to_center(z.state(0), z.state(1)) + metric.time_weight * time_gap;
}

}  // namespace

PlanResult plan(const DynamicsModel& model, const Environment& env, const StateTimePoint& z_init,
                double t_final, const PlannerParams& params, const StreamKey& key) {
  if (z_init.state.size() != model.state_dim()) throw ContractError("plan: z_init dimension");
  if (!env.point_free(z_init.state(0), z_init.state(1))) throw ContractError("plan: z_init is in collision");

  const DynamicsModel steer_model =
      params.steer_noise_scale ? model.with_noise_scale(*params.steer_noise_scale) : model;
  const GoalSet& goal = env.goal();

  PlanResult out;
  out.tree.add_root(z_init);
  if (goal.contains(z_init.state, z_init.time)) {
    out.branch = extract_branch(out.tree, 0, model.control_dim(), params.dt);
    out.branch.reached_goal = true;
    return out;
  }

  // Best-effort leaves that cover the next execution window win over shorter
  // ones, whose zero-control tail is blind to obstacles.
  Index best_leaf = 0;
  double best_goal_distance = goal_distance(goal, z_init, params.metric);
  Index best_long_leaf = -1;
  double best_long_distance = kInfinity;
  const double long_enough = std::min(z_init.time + params.fallback_min_duration, t_final) - 1e-9;
  if (steps_between(z_init.time, t_final, params.dt) >= 1) {
    const SamplingBox box = car_sampling_box(env, z_init.time, t_final);
    RngStream sampler(key, StreamRole::Sample);
    const ExtendContext ctx{steer_model, env, params, t_final};
    for (Index it = 0; it < params.max_iterations; ++it) {
      out.iterations = it + 1;
      const StateTimePoint z_rand = sample_free(sampler, box, env, params.rejection_budget);
      RngStream steer_rng(key, StreamRole::Steer, static_cast<std::uint64_t>(it));
      const ExtendResult r = extend(out.tree, z_rand, ctx, steer_rng);
      if (r.status != ExtendStatus::Advanced) continue;
      const StateTimePoint& zv = out.tree.vertex(r.vertex);
      if (goal.contains(zv.state, zv.time)) {
        out.branch = extract_branch(out.tree, r.vertex, model.control_dim(), params.dt);
        out.branch.reached_goal = true;
        return out;
      }
      const double gd = goal_distance(goal, zv, params.metric);
      if (gd < best_goal_distance) {
        best_goal_distance = gd;
        best_leaf = r.vertex;
      }
      if (zv.time >= long_enough && gd < best_long_distance) {
        best_long_distance = gd;
        best_long_leaf = r.vertex;
      }
    }
  }
  if (best_long_leaf >= 0) best_leaf = best_long_leaf;
  out.branch = extract_branch(out.tree, best_leaf, model.control_dim(), params.dt);
  out.branch.reached_goal = false;
  return out;
}

TreeAudit audit_tree(const TreeGraph& tree, const Environment& env) {
  TreeAudit a;
  Index roots = 0;
  for (Index v = 0; v < tree.size(); ++v) {
    const Index p = tree.parent(v);
    if (p < 0) {
      ++roots;
      continue;
    }
    if (p >= v) a.single_root = false;  // parents precede children, which rules out cycles
    if (!(tree.vertex(p).time < tree.vertex(v).time)) a.time_monotone = false;
    const Trajectory& e = tree.edge_trajectory(v);
    if (e.size() < 2 || e.states.col(0) != tree.vertex(p).state ||
        e.states.col(e.size() - 1) != tree.vertex(v).state)
      a.edges_consistent = false;
    if (!obstacle_free(e, env)) a.edges_collision_free = false;
  }
  if (roots != 1 || (tree.size() > 0 && tree.parent(0) != -1)) a.single_root = false;
  return a;
}

}  // namespace pirrt
