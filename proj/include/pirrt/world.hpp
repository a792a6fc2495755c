#pragma once

#include "pirrt/sde.hpp"
#include "pirrt/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pirrt {

/// Closed axis-aligned rectangle.
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  /// True when the closed segment a-b touches the closed rectangle.
  bool intersects_segment(double ax, double ay, double bx, double by) const;
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
};

/// Position disc crossed with a time window.
struct GoalSet {
  double center_x = 9.0;
  double center_y = 0.0;
  double radius = 1.0;
  double t_lo = 9.5;
  double t_hi = 10.0;

  bool contains_position(double x, double y) const;
  bool contains(const ConstVectorRef& state, double time) const;
  double distance_to_center(double x, double y) const;
};

enum class Corridor { None, BottomCorner, BottomSlit, Slit, TopSlit, TopCorner };

std::string_view to_string(Corridor c);
Corridor corridor_from_string(std::string_view name);

/// Horizontal band at the block's x-position; bands partition the workspace's
/// vertical extent, [y_lo, y_hi) except for the topmost which is closed.
struct CorridorBand {
  Corridor label = Corridor::None;
  double y_lo = 0.0;
  double y_hi = 0.0;
};

class Environment {
 public:
  Environment() = default;
  Environment(std::string name, Rect workspace, std::vector<Rect> obstacles, GoalSet goal,
              std::vector<CorridorBand> corridors);

  const std::string& name() const { return name_; }
  const Rect& workspace() const { return workspace_; }
  const std::vector<Rect>& obstacles() const { return obstacles_; }
  const GoalSet& goal() const { return goal_; }
  const std::vector<CorridorBand>& corridors() const { return corridors_; }

  /// x-coordinate of the midline of the obstacle block (workspace centre if
  /// there are no obstacles).
  double block_midline() const { return midline_; }

  /// Free iff strictly inside the workspace and outside every closed obstacle.
  bool point_free(double x, double y) const;
  bool segment_free(double ax, double ay, double bx, double by) const;

  /// Corridor band containing y; values outside the workspace map to the
  /// nearest end band.
  Corridor corridor_at(double y) const;

 private:
  std::string name_;
  Rect workspace_;
  std::vector<Rect> obstacles_;
  GoalSet goal_;
  std::vector<CorridorBand> corridors_;
  double midline_ = 0.0;
};

/// Environment plus the mission boundary conditions.
struct Scenario {
  Environment environment;
  Vector start_state;
  double t_init = 0.0;
  double t_final = 10.0;
};

struct CarParams {
  double speed = 2.0;
  double turn_constant = 1.0;
  double noise_scale = 0.25;
};

/// Kinematic car dx = v cos th, dy = v sin th, dth = (w dt + alpha dw) / r.
DynamicsModel car_dynamics(const CarParams& params);

struct SingleSlitGeometry {
  double block_x_min = -0.5;
  double block_x_max = 0.5;
  double block_y_min = -6.0;
  double block_y_max = 6.0;
  double slit_lo = -0.5;
  double slit_hi = 0.5;
};

struct DoubleSlitGeometry {
  double block_x_min = -1.5;
  double block_x_max = 1.5;
  double block_y_min = -3.0;
  double block_y_max = 3.0;
  double lower_slit_lo = -2.5;
  double lower_slit_hi = -1.5;
  double upper_slit_lo = 1.5;
  double upper_slit_hi = 2.5;
};

Rect default_workspace();
GoalSet default_goal();

Environment single_slit_world(const SingleSlitGeometry& g = {});
Environment double_slit_world(const DoubleSlitGeometry& g = {});
Environment open_world();

/// The shipped presets: "single_slit", "double_slit", "open".
Scenario scenario_preset(std::string_view id);
std::vector<std::string> scenario_preset_ids();

/// Collision check of every point and every segment between consecutive
/// points (positions are state components 0 and 1).
bool obstacle_free(const Trajectory& traj, const Environment& env);

/// Corridor used at the first crossing of the block midline; None if the
/// trajectory never crosses it.
Corridor classify_crossing(const Trajectory& traj, const Environment& env);

/// Planar angle wrapped into (-pi, pi].
double wrap_angle(double a);

}  // namespace pirrt
