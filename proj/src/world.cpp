#include "pirrt/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace pirrt {

bool Rect::intersects_segment(double ax, double ay, double bx, double by) const {
  // Liang-Barsky clipping against the closed box.
  double s0 = 0.0;
  double s1 = 1.0;
  const double p[2] = {ax, ay};
  const double d[2] = {bx - ax, by - ay};
  const double lo[2] = {x_min, y_min};
  const double hi[2] = {x_max, y_max};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p[k] < lo[k] || p[k] > hi[k]) return false;
      continue;
    }
    double sa = (lo[k] - p[k]) / d[k];
    double sb = (hi[k] - p[k]) / d[k];
    if (sa > sb) std::swap(sa, sb);
    s0 = std::max(s0, sa);
    s1 = std::min(s1, sb);
    if (s0 > s1) return false;
  }
  return true;
}

bool GoalSet::contains_position(double x, double y) const {
  return distance_to_center(x, y) <= radius;
}

bool GoalSet::contains(const ConstVectorRef& state, double time) const {
  constexpr double kTimeSlack = 1e-9;
  return time >= t_lo - kTimeSlack && time <= t_hi + kTimeSlack && contains_position(state(0), state(1));
}

double GoalSet::distance_to_center(double x, double y) const {
  return std::hypot(x - center_x, y - center_y);
}

std::string_view to_string(Corridor c) {
  switch (c) {
    case Corridor::BottomCorner: return "bottom_corner";
    case Corridor::BottomSlit: return "bottom_slit";
    case Corridor::Slit: return "slit";
    case Corridor::TopSlit: return "top_slit";
    case Corridor::TopCorner: return "top_corner";
    case Corridor::None: break;
  }
  return "none";
}

Corridor corridor_from_string(std::string_view name) {
  for (Corridor c : {Corridor::None, Corridor::BottomCorner, Corridor::BottomSlit, Corridor::Slit,
                     Corridor::TopSlit, Corridor::TopCorner})
    if (to_string(c) == name) return c;
  throw ContractError("unknown corridor label: " + std::string(name));
}

Environment::Environment(std::string name, Rect workspace, std::vector<Rect> obstacles, GoalSet goal,
                         std::vector<CorridorBand> corridors)
    : name_(std::move(name)),
      workspace_(workspace),
      obstacles_(std::move(obstacles)),
      goal_(goal),
      corridors_(std::move(corridors)) {
  if (!(workspace_.x_min < workspace_.x_max) || !(workspace_.y_min < workspace_.y_max))
    throw ContractError("Environment: empty workspace");
  for (const Rect& r : obstacles_) {
    if (!(r.x_min < r.x_max) || !(r.y_min < r.y_max)) throw ContractError("Environment: degenerate obstacle");
    if (r.x_min < workspace_.x_min || r.x_max > workspace_.x_max || r.y_min < workspace_.y_min ||
        r.y_max > workspace_.y_max)
      throw ContractError("Environment: obstacle outside workspace");
  }
  if (!(goal_.radius > 0.0)) throw ContractError("Environment: goal radius must be positive");
  if (!(goal_.t_lo < goal_.t_hi)) throw ContractError("Environment: goal time window is empty");
  std::sort(corridors_.begin(), corridors_.end(),
            [](const CorridorBand& a, const CorridorBand& b) { return a.y_lo < b.y_lo; });
  for (std::size_t i = 0; i < corridors_.size(); ++i) {
    if (!(corridors_[i].y_lo < corridors_[i].y_hi)) throw ContractError("Environment: empty corridor band");
    if (i > 0 && corridors_[i].y_lo != corridors_[i - 1].y_hi)
      throw ContractError("Environment: corridor bands must tile the vertical extent");
  }
  if (obstacles_.empty()) {
    midline_ = workspace_.center_x();
  } else {
    double lo = obstacles_.front().x_min;
    double hi = obstacles_.front().x_max;
    for (const Rect& r : obstacles_) {
      lo = std::min(lo, r.x_min);
      hi = std::max(hi, r.x_max);
    }
    midline_ = 0.5 * (lo + hi);
  }
}

bool Environment::point_free(double x, double y) const {
  if (!(x > workspace_.x_min && x < workspace_.x_max && y > workspace_.y_min && y < workspace_.y_max))
    return false;
  for (const Rect& r : obstacles_)
    if (r.contains(x, y)) return false;
  return true;
}

bool Environment::segment_free(double ax, double ay, double bx, double by) const {
  if (!point_free(ax, ay) || !point_free(bx, by)) return false;
  for (const Rect& r : obstacles_)
    if (r.intersects_segment(ax, ay, bx, by)) return false;
  return true;
}

Corridor Environment::corridor_at(double y) const {
  if (corridors_.empty()) return Corridor::None;
  for (std::size_t i = 0; i + 1 < corridors_.size(); ++i)
    if (y < corridors_[i].y_hi) return corridors_[i].label;
  return corridors_.back().label;
}

DynamicsModel car_dynamics(const CarParams& params) {
  if (!(params.speed > 0.0)) throw ContractError("car_dynamics: speed must be positive");
  if (!(params.turn_constant > 0.0)) throw ContractError("car_dynamics: turn constant must be positive");
  if (!(params.noise_scale >= 0.0)) throw ContractError("car_dynamics: alpha must be >= 0");
  const double v = params.speed;
  const double inv_r = 1.0 / params.turn_constant;
  return DynamicsModel(
      3, 1,
      [v](const ConstVectorRef& x, VectorRef out) {
        out(0) = v * std::cos(x(2));
        out(1) = v * std::sin(x(2));
        out(2) = 0.0;
      },
      [inv_r](const ConstVectorRef&, MatrixRef out) {
        out(0, 0) = 0.0;
        out(1, 0) = 0.0;
        out(2, 0) = inv_r;
      },
      params.noise_scale, "kinematic_car");
}

Rect default_workspace() { return {-10.0, 10.0, -10.0, 10.0}; }

GoalSet default_goal() { return {}; }

namespace {

// Bands split at the vertical centre of each block part, so every gap and the
// two outer passages get exactly one band.
std::vector<CorridorBand> bands_for(const Rect& workspace, std::vector<Rect> parts,
                                    const std::vector<Corridor>& labels) {
  std::sort(parts.begin(), parts.end(), [](const Rect& a, const Rect& b) { return a.y_min < b.y_min; });
  std::vector<CorridorBand> bands;
  double lo = workspace.y_min;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    bands.push_back({labels[i], lo, parts[i].center_y()});
    lo = parts[i].center_y();
  }
  bands.push_back({labels.back(), lo, workspace.y_max});
  return bands;
}

}  // namespace

Environment single_slit_world(const SingleSlitGeometry& g) {
  if (!(g.slit_hi > g.slit_lo)) throw ContractError("single_slit_world: slit height must be positive");
  if (!(g.block_x_max > g.block_x_min)) throw ContractError("single_slit_world: block has no thickness");
  if (!(g.slit_lo > g.block_y_min && g.slit_hi < g.block_y_max))
    throw ContractError("single_slit_world: slit must lie strictly inside the block");
  const Rect ws = default_workspace();
  std::vector<Rect> parts = {{g.block_x_min, g.block_x_max, g.block_y_min, g.slit_lo},
                             {g.block_x_min, g.block_x_max, g.slit_hi, g.block_y_max}};
  auto bands = bands_for(ws, parts, {Corridor::BottomCorner, Corridor::Slit, Corridor::TopCorner});
  return Environment("single_slit", ws, std::move(parts), default_goal(), std::move(bands));
}

Environment double_slit_world(const DoubleSlitGeometry& g) {
  if (!(g.lower_slit_hi > g.lower_slit_lo) || !(g.upper_slit_hi > g.upper_slit_lo))
    throw ContractError("double_slit_world: slit heights must be positive");
  if (!(g.block_x_max > g.block_x_min)) throw ContractError("double_slit_world: block has no thickness");
  if (!(g.block_y_min < g.lower_slit_lo && g.lower_slit_hi < g.upper_slit_lo &&
        g.upper_slit_hi < g.block_y_max))
    throw ContractError("double_slit_world: slits must be ordered strictly inside the block");
  const Rect ws = default_workspace();
  std::vector<Rect> parts = {{g.block_x_min, g.block_x_max, g.block_y_min, g.lower_slit_lo},
                             {g.block_x_min, g.block_x_max, g.lower_slit_hi, g.upper_slit_lo},
                             {g.block_x_min, g.block_x_max, g.upper_slit_hi, g.block_y_max}};
  auto bands = bands_for(ws, parts,
                         {Corridor::BottomCorner, Corridor::BottomSlit, Corridor::TopSlit, Corridor::TopCorner});
  return Environment("double_slit", ws, std::move(parts), default_goal(), std::move(bands));
}

Environment open_world() {
  // Straight-line reach of the start at v = 2 ends at (9, 0) at t = 9.
  GoalSet goal{9.0, 0.0, 1.0, 8.5, 9.0};
  return Environment("open", default_workspace(), {}, goal, {});
}

Scenario scenario_preset(std::string_view id) {
  Scenario s;
  s.start_state = Vector::Zero(3);
  s.start_state(0) = -9.0;
  s.t_init = 0.0;
  s.t_final = 10.0;
  if (id == "single_slit") {
    s.environment = single_slit_world();
  } else if (id == "double_slit") {
    s.environment = double_slit_world();
  } else if (id == "open") {
    s.environment = open_world();
    s.t_final = 9.0;
  } else {
    throw ContractError("unknown scenario preset: " + std::string(id));
  }
  return s;
}

std::vector<std::string> scenario_preset_ids() { return {"single_slit", "double_slit", "open"}; }

bool obstacle_free(const Trajectory& traj, const Environment& env) {
  const Index n = traj.size();
  if (n == 0) return true;
  if (n == 1) return env.point_free(traj.states(0, 0), traj.states(1, 0));
  for (Index i = 0; i + 1 < n; ++i)
    if (!env.segment_free(traj.states(0, i), traj.states(1, i), traj.states(0, i + 1), traj.states(1, i + 1)))
      return false;
  return true;
}

Corridor classify_crossing(const Trajectory& traj, const Environment& env) {
  const double mid = env.block_midline();
  for (Index i = 0; i + 1 < traj.size(); ++i) {
    const double xa = traj.states(0, i);
    const double xb = traj.states(0, i + 1);
    const bool crosses = (xa < mid && xb >= mid) || (xa > mid && xb <= mid);
    if (!crosses) continue;
    const double lambda = (mid - xa) / (xb - xa);
    const double y = traj.states(1, i) + lambda * (traj.states(1, i + 1) - traj.states(1, i));
    return env.corridor_at(y);
  }
  return Corridor::None;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace pirrt
