#pragma once

#include "pirrt/path_integral.hpp"
#include "pirrt/rng.hpp"
#include "pirrt/rrt.hpp"
#include "pirrt/sde.hpp"
#include "pirrt/world.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pirrt {

enum class Algorithm { Rrt, PiRrt };
std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

enum class WeightingMode { CostToGo, WholePath };

enum class Outcome { Success, Collision, GoalMiss, Timeout };
std::string_view to_string(Outcome o);

struct ControllerParams {
  PlannerParams planner;
  Index bundle_size = 100;   // M
  Index execute_steps = 10;  // tau
  ControlBounds bounds = ControlBounds::symmetric(1, 1.0);
  WeightingMode weighting = WeightingMode::CostToGo;
  Index correction_iterations = 1;
  bool replan_each_cycle = true;
  double mission_timeout_s = 60.0;
  bool keep_bundles = true;
  bool keep_trees = false;
};

/// Phi(x) = w_T |(x, y) - goal centre|^2, q = 0, collision (including
/// leaving the workspace) maps to +inf.
CostFunctional goal_cost(const Environment& env, double terminal_weight = 1.0);

struct ReplanCycleRecord {
  Index cycle_index = 0;
  StateTimePoint start;
  Trajectory baseline;           // RRT branch, padded to t_final without control
  ControlSchedule baseline_controls;  // clamped u_RRT over the remaining horizon
  bool baseline_reached_goal = false;
  Index tree_size = 0;
  Index planner_iterations = 0;
  std::optional<TreeGraph> tree;
  Index bundle_size = 0;         // 0 marks an RRT-only cycle
  std::vector<Trajectory> bundle;
  Vector bundle_costs;           // whole-path S per member
  Vector bundle_weights;         // weights at the first step
  ControlSchedule u_pi;
  Trajectory executed;
  std::vector<std::string> warnings;
};

struct MissionResult {
  Algorithm algorithm = Algorithm::PiRrt;
  Trajectory executed;
  std::vector<ReplanCycleRecord> cycles;
  Outcome outcome = Outcome::GoalMiss;
  Corridor corridor = Corridor::None;
  double terminal_cost = 0.0;
  double wall_time_s = 0.0;
};

/// M rollouts from the baseline start under its control schedule, each with a
/// fresh noise stream (key role Bundle, index first_index + k).
std::vector<Trajectory> sample_bundle(const DynamicsModel& model, const StateTimePoint& start,
                                      const ControlSchedule& baseline_controls, Index samples,
                                      const StreamKey& key, Index first_index = 0);

/// Path-integral correction over a bundle. Returns nullopt when every member
/// is infeasible.
struct Correction {
  ControlSchedule delta;
  Vector costs;
  Vector first_step_weights;
};
std::optional<Correction> bundle_correction(std::span<const Trajectory> bundle, const CostFunctional& cost,
                                            double rho_magnitude, WeightingMode mode);

struct MissionContext {
  const DynamicsModel& model;
  const Environment& env;
  const CostFunctional& cost;
  const ControllerParams& params;
  double t_final;
};

/// One receding-horizon cycle: plan, correct (PI-RRT only), execute the first
/// min(tau, remaining) steps under fresh execution noise.
ReplanCycleRecord replan_cycle(const MissionContext& ctx, const StateTimePoint& current, Algorithm algorithm,
                               const StreamKey& key, const PlanResult* cached_plan = nullptr);

MissionResult run_mission(const MissionContext& ctx, const StateTimePoint& z_init, const StreamKey& key);
MissionResult run_rrt_only(const MissionContext& ctx, const StateTimePoint& z_init, const StreamKey& key);
MissionResult run(const MissionContext& ctx, const StateTimePoint& z_init, Algorithm algorithm,
                  const StreamKey& key);

}  // namespace pirrt
