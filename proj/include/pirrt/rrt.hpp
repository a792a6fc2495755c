#pragma once

#include "pirrt/rng.hpp"
#include "pirrt/sde.hpp"
#include "pirrt/types.hpp"
#include "pirrt/world.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pirrt {

/// d = |position difference| + c_theta |wrap(dtheta)| + c_t |dt|.
/// Every state component other than angle_index counts as a position.
struct DistanceMetric {
  double angle_weight = 1.0;
  double time_weight = 2.0;
  Index angle_index = 2;  // -1: no angular component

  double operator()(const ConstVectorRef& xa, double ta, const ConstVectorRef& xb, double tb) const;
  double operator()(const StateTimePoint& a, const StateTimePoint& b) const {
    return (*this)(a.state, a.time, b.state, b.time);
  }
};

/// Rooted tree in state-time space. Edge data is indexed by child vertex;
/// the root's entries are empty.
class TreeGraph {
 public:
  Index size() const { return static_cast<Index>(vertices_.size()); }
  bool empty() const { return vertices_.empty(); }

  Index add_root(StateTimePoint root);
  Index add_vertex(Index parent, Trajectory edge, ControlSchedule controls);

  const StateTimePoint& vertex(Index i) const { return vertices_[static_cast<std::size_t>(i)]; }
  Index parent(Index i) const { return parents_[static_cast<std::size_t>(i)]; }
  const Trajectory& edge_trajectory(Index child) const { return edges_[static_cast<std::size_t>(child)]; }
  const ControlSchedule& edge_controls(Index child) const { return controls_[static_cast<std::size_t>(child)]; }
  const std::vector<StateTimePoint>& vertices() const { return vertices_; }

  /// Vertex indices from the root to v inclusive.
  std::vector<Index> path_to(Index v) const;

 private:
  std::vector<StateTimePoint> vertices_;
  std::vector<Index> parents_;
  std::vector<Trajectory> edges_;
  std::vector<ControlSchedule> controls_;
};

/// Uniform sampling box for Z = X x T. Time is drawn from (t_lo, t_hi].
struct SamplingBox {
  Vector lower;
  Vector upper;
  double t_lo = 0.0;
  double t_hi = 10.0;
};

/// Box spanning the workspace with headings in [-pi, pi].
SamplingBox car_sampling_box(const Environment& env, double t_lo, double t_hi);

struct PlannerParams {
  Index steer_samples = 10;  // K
  Index horizon_steps = 10;  // H
  Index max_iterations = 6000;
  Index rejection_budget = 10000;
  double dt = 0.1;
  DistanceMetric metric;
  std::optional<double> steer_noise_scale;  // defaults to the model's alpha
  std::optional<double> feedforward_limit = 1.0;  // admissible |u| for stored edge controls
  double fallback_min_duration = 1.0;  // preferred span of a best-effort branch, seconds
};

struct SteerResult {
  Trajectory trajectory;      // unforced rollout: zero controls, realised noise
  ControlSchedule feedforward;  // noise-equivalent control alpha dw / dt
  Index chosen = 0;
};

enum class ExtendStatus { Advanced, Trapped };

struct ExtendResult {
  ExtendStatus status = ExtendStatus::Trapped;
  Index vertex = -1;
};

struct Branch {
  std::vector<Index> vertices;
  Trajectory trajectory;
  ControlSchedule feedforward;
  bool reached_goal = false;
};

struct PlanResult {
  TreeGraph tree;
  Branch branch;
  Index iterations = 0;
};

/// i.i.d. uniform draw over the box, rejected while the position is not free.
StateTimePoint sample_free(RngStream& rng, const SamplingBox& box, const Environment& env,
                           Index rejection_budget = 10000);

/// Index of the vertex minimising the metric; ties go to the lowest index.
Index nearest(const TreeGraph& tree, const StateTimePoint& z, const DistanceMetric& metric);

/// K unforced H-step rollouts from `from`, drawn in order from rng. H is
/// truncated so the rollouts never pass t_final. With a feedforward limit the
/// increments are clipped to |dw| <= limit dt / alpha, so the edge's
/// noise-equivalent control is admissible and replays the edge exactly.
std::vector<Trajectory> steer_candidates(const DynamicsModel& model, const StateTimePoint& from,
                                         Index samples, Index horizon_steps, double dt, double t_final,
                                         RngStream& rng, std::optional<double> feedforward_limit = {});

/// Rollout among the candidates whose endpoint is nearest to `toward`.
SteerResult steer(const DynamicsModel& model, const StateTimePoint& from, const StateTimePoint& toward,
                  Index samples, Index horizon_steps, double dt, double t_final,
                  const DistanceMetric& metric, RngStream& rng,
                  std::optional<double> feedforward_limit = {});

/// Noise-equivalent control for an unforced edge: alpha dw_i / dt.
ControlSchedule noise_equivalent_control(const NoiseProfile& noise, double noise_scale);

struct ExtendContext {
  const DynamicsModel& model;  // steering model
  const Environment& env;
  const PlannerParams& params;
  double t_final;
};

ExtendResult extend(TreeGraph& tree, const StateTimePoint& z_rand, const ExtendContext& ctx, RngStream& rng);

/// Root-to-leaf concatenation of edge trajectories and feedforward controls.
Branch extract_branch(const TreeGraph& tree, Index leaf, Index control_dim, double dt);

/**
 * RRT in state-time space from z_init. Stops at the first vertex in the
 * goal set; otherwise returns the branch ending nearest the goal with
 * reached_goal = false. Random streams are derived from `key`.
 */
PlanResult plan(const DynamicsModel& model, const Environment& env, const StateTimePoint& z_init,
                double t_final, const PlannerParams& params, const StreamKey& key);

/// Tree invariants: one root, parent.time < child.time, edges start at the
/// parent and end at the child, every edge collision-free.
struct TreeAudit {
  bool single_root = true;
  bool time_monotone = true;
  bool edges_consistent = true;
  bool edges_collision_free = true;
  bool ok() const { return single_root && time_monotone && edges_consistent && edges_collision_free; }
};

TreeAudit audit_tree(const TreeGraph& tree, const Environment& env);

}  // namespace pirrt
