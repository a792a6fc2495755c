#include "pirrt/plots.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pirrt {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Maps workspace coordinates to pixels with y pointing up; panels are laid
// out left to right.
class Canvas {
 public:
  Canvas(const Environment& env, const PlotStyle& style, int panels = 1)
      : ws_(env.workspace()), style_(style), panels_(panels) {}

  double panel_width() const { return (ws_.x_max - ws_.x_min) * style_.pixels_per_unit + 2 * style_.margin; }
  double height() const { return (ws_.y_max - ws_.y_min) * style_.pixels_per_unit + 2 * style_.margin; }

  double px(double x, int panel) const {
    return panel * panel_width() + style_.margin + (x - ws_.x_min) * style_.pixels_per_unit;
  }
  double py(double y) const { return style_.margin + (ws_.y_max - y) * style_.pixels_per_unit; }

  void open() {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(panels_ * panel_width())
         << "\" height=\"" << fmt(height()) << "\" viewBox=\"0 0 " << fmt(panels_ * panel_width()) << ' '
         << fmt(height()) << "\">\n";
    out_ << "<style>"
            ".workspace{fill:#fff;stroke:#000;stroke-width:1.5}"
            ".obstacle{fill:#555;stroke:none}"
            ".goal{fill:#9cf;fill-opacity:0.6;stroke:#36c}"
            ".tree{fill:none;stroke:#36c;stroke-width:0.6;stroke-opacity:0.5}"
            ".vertex{fill:#2a2}"
            ".bundle{fill:none;stroke:#999;stroke-width:0.5;stroke-opacity:0.4}"
            ".baseline{fill:none;stroke:#c60;stroke-width:1.5;stroke-dasharray:4 2}"
            ".executed{fill:none;stroke:#c00;stroke-width:2}"
            ".collision{fill:none;stroke:#c00;stroke-width:0.8;stroke-opacity:0.6}"
            ".success{fill:none;stroke:#080;stroke-width:0.8;stroke-opacity:0.6}"
            "</style>\n";
  }

  void environment(const Environment& env, int panel) {
    rect(ws_, "workspace", panel);
    for (const Rect& r : env.obstacles()) rect(r, "obstacle", panel);
    const GoalSet& g = env.goal();
    out_ << "<circle class=\"goal\" cx=\"" << fmt(px(g.center_x, panel)) << "\" cy=\"" << fmt(py(g.center_y))
         << "\" r=\"" << fmt(g.radius * style_.pixels_per_unit) << "\"/>\n";
  }

  void polyline(const Trajectory& t, const char* cls, int panel) {
    if (t.size() < 1) return;
    out_ << "<polyline class=\"" << cls << "\" points=\"";
    for (Index i = 0; i < t.size(); ++i) {
      if (i) out_ << ' ';
      out_ << fmt(px(t.states(0, i), panel)) << ',' << fmt(py(t.states(1, i)));
    }
    out_ << "\"/>\n";
  }

  void tree(const TreeGraph& tree, int panel) {
    for (Index v = 1; v < tree.size(); ++v) polyline(tree.edge_trajectory(v), "tree", panel);
    for (Index v = 0; v < tree.size(); ++v) {
      const auto& z = tree.vertex(v);
      out_ << "<circle class=\"vertex\" cx=\"" << fmt(px(z.state(0), panel)) << "\" cy=\"" << fmt(py(z.state(1)))
           << "\" r=\"1.5\"/>\n";
    }
  }

  void label(const std::string& text, int panel) {
    out_ << "<text x=\"" << fmt(panel * panel_width() + style_.margin + 4) << "\" y=\""
         << fmt(style_.margin + 14) << "\" font-family=\"sans-serif\" font-size=\"12\">" << text << "</text>\n";
  }

  std::string close() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  void rect(const Rect& r, const char* cls, int panel) {
    out_ << "<rect class=\"" << cls << "\" x=\"" << fmt(px(r.x_min, panel)) << "\" y=\"" << fmt(py(r.y_max))
         << "\" width=\"" << fmt((r.x_max - r.x_min) * style_.pixels_per_unit) << "\" height=\""
         << fmt((r.y_max - r.y_min) * style_.pixels_per_unit) << "\"/>\n";
  }

  Rect ws_;
  PlotStyle style_;
  int panels_;
  std::ostringstream out_;
};

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw std::runtime_error("cannot create plot directory " + dir.string());
}

}  // namespace

std::string environment_svg(const Environment& env, const PlotStyle& style) {
  Canvas c(env, style);
  c.open();
  c.environment(env, 0);
  return c.close();
}

std::string cycle_svg(const Environment& env, const ReplanCycleRecord& cycle, const PlotStyle& style) {
  Canvas c(env, style);
  c.open();
  c.environment(env, 0);
  if (style.draw_tree && cycle.tree) c.tree(*cycle.tree, 0);
  if (style.draw_bundle)
    for (const Trajectory& b : cycle.bundle) c.polyline(b, "bundle", 0);
  c.polyline(cycle.baseline, "baseline", 0);
  c.polyline(cycle.executed, "executed", 0);
  c.label("cycle " + std::to_string(cycle.cycle_index) + ", t = " + fmt(cycle.start.time), 0);
  return c.close();
}

std::string mission_svg(const Environment& env, const MissionResult& mission, const PlotStyle& style) {
  Canvas c(env, style);
  c.open();
  c.environment(env, 0);
  if (style.draw_tree && !mission.cycles.empty() && mission.cycles.front().tree) c.tree(*mission.cycles.front().tree, 0);
  if (!mission.cycles.empty()) c.polyline(mission.cycles.front().baseline, "baseline", 0);
  c.polyline(mission.executed, "executed", 0);
  c.label(std::string(to_string(mission.algorithm)) + ": " + std::string(to_string(mission.outcome)), 0);
  return c.close();
}

std::string outcomes_svg(const Environment& env, std::span<const Trajectory> paths,
                         std::span<const Outcome> outcomes, const PlotStyle& style) {
  if (paths.size() != outcomes.size()) throw ContractError("outcomes_svg: paths and outcomes differ in length");
  Canvas c(env, style, 2);
  c.open();
  c.environment(env, 0);
  c.environment(env, 1);
  Index hits = 0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const bool hit = outcomes[k] == Outcome::Collision;
    hits += hit;
    c.polyline(paths[k], hit ? "collision" : "success", hit ? 0 : 1);
  }
  c.label("collision: " + std::to_string(hits), 0);
  c.label("collision-free: " + std::to_string(static_cast<Index>(paths.size()) - hits), 1);
  return c.close();
}

std::vector<std::filesystem::path> emit_plots(const Environment& env, const MissionResult& mission,
                                              const std::filesystem::path& dir, const PlotStyle& style) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> out;
  out.push_back(dir / "mission.svg");
  write_text(out.back(), mission_svg(env, mission, style));
  for (const ReplanCycleRecord& cycle : mission.cycles) {
    out.push_back(dir / ("cycle_" + std::to_string(cycle.cycle_index) + ".svg"));
    write_text(out.back(), cycle_svg(env, cycle, style));
  }
  return out;
}

std::vector<std::filesystem::path> emit_plots(const Environment& env, const ExperimentResult& result,
                                              const std::filesystem::path& dir, const PlotStyle& style) {
  ensure_dir(dir);
  std::vector<Outcome> outcomes;
  for (const TrialSummary& t : result.trials) outcomes.push_back(t.outcome);
  if (outcomes.size() != result.paths.size()) throw ContractError("emit_plots: experiment was run without keep_paths");
  const auto path = dir / "outcomes.svg";
  write_text(path, outcomes_svg(env, result.paths, outcomes, style));
  return {path};
}

}  // namespace pirrt
