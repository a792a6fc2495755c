#pragma once

#include "pirrt/experiment.hpp"
#include "pirrt/pi_rrt.hpp"
#include "pirrt/world.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pirrt {

struct PlotStyle {
  double pixels_per_unit = 30.0;
  double margin = 12.0;
  bool draw_tree = true;
  bool draw_bundle = true;
};

// Each renderer returns a complete SVG document. Polylines carry a class
// (tree, baseline, bundle, executed, collision, success) so figures can be
// restyled or counted without parsing geometry.
std::string environment_svg(const Environment& env, const PlotStyle& style = {});
std::string cycle_svg(const Environment& env, const ReplanCycleRecord& cycle, const PlotStyle& style = {});
std::string mission_svg(const Environment& env, const MissionResult& mission, const PlotStyle& style = {});

/// Two panels side by side: colliding trajectories on the left, the rest
/// on the right. paths and outcomes are parallel arrays.
std::string outcomes_svg(const Environment& env, std::span<const Trajectory> paths,
                         std::span<const Outcome> outcomes, const PlotStyle& style = {});

/// mission.svg plus cycle_<k>.svg per replanning cycle. Throws
/// std::runtime_error when dir cannot be created or written.
std::vector<std::filesystem::path> emit_plots(const Environment& env, const MissionResult& mission,
                                              const std::filesystem::path& dir, const PlotStyle& style = {});

/// outcomes.svg for an experiment run with keep_paths.
std::vector<std::filesystem::path> emit_plots(const Environment& env, const ExperimentResult& result,
                                              const std::filesystem::path& dir, const PlotStyle& style = {});

}  // namespace pirrt
