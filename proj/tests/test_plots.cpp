#include "pirrt/plots.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pirrt;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small(Index trials) {
  ExperimentConfig c;
  c.scenario = "double_slit";
  c.trials = trials;
  c.controller.bundle_size = 15;
  c.controller.planner.max_iterations = 600;
  return c;
}

}  // namespace

TEST(Svg, EnvironmentOnly) {
  for (const auto& id : scenario_preset_ids()) {
    const Environment env = scenario_preset(id).environment;
    const std::string svg = environment_svg(env);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(count(svg, "class=\"obstacle\""), env.obstacles().size());
    EXPECT_EQ(count(svg, "<polyline"), 0u);
    EXPECT_EQ(count(svg, "class=\"goal\""), 1u);
  }
}

TEST(Svg, EmptyCycleDoesNotCrash) {
  ReplanCycleRecord empty;
  const std::string svg = cycle_svg(double_slit_world(), empty);
  EXPECT_EQ(count(svg, "class=\"bundle\""), 0u);
  EXPECT_EQ(count(svg, "class=\"tree\""), 0u);
  MissionResult none;
  none.executed.states = Matrix::Zero(3, 1);
  none.executed.times = Vector::Zero(1);
  EXPECT_NO_THROW(mission_svg(double_slit_world(), none));
}

TEST(Svg, BundleFigureHasOnePolylinePerMember) {
  ExperimentConfig c = small(1);
  c.keep_paths = true;
  c.controller.keep_trees = true;
  const MissionResult m = run_trial(c, 0);
  const Environment env = resolve_scenario(c).environment;
  ASSERT_FALSE(m.cycles.empty());
  for (const auto& cycle : m.cycles) {
    const std::string svg = cycle_svg(env, cycle);
    EXPECT_EQ(count(svg, "class=\"bundle\""), static_cast<std::size_t>(c.controller.bundle_size));
    EXPECT_EQ(count(svg, "class=\"executed\""), 1u);
    EXPECT_EQ(count(svg, "class=\"baseline\""), 1u);
    if (cycle.tree) {
      EXPECT_EQ(count(svg, "class=\"tree\""), static_cast<std::size_t>(cycle.tree->size() - 1));
    }
  }
  PlotStyle plain;
  plain.draw_bundle = false;
  plain.draw_tree = false;
  EXPECT_EQ(count(cycle_svg(env, m.cycles.front(), plain), "class=\"bundle\""), 0u);
}

TEST(Svg, FilesReproducible) {
  ExperimentConfig c = small(1);
  c.keep_paths = true;
  const Environment env = resolve_scenario(c).environment;
  const fs::path a = fs::temp_directory_path() / "pirrt_plots_a", b = fs::temp_directory_path() / "pirrt_plots_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto fa = emit_plots(env, run_trial(c, 0), a);
  const auto fb = emit_plots(env, run_trial(c, 0), b);
  ASSERT_EQ(fa.size(), fb.size());
  EXPECT_EQ(fa.front().filename(), "mission.svg");
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(slurp(fa[i]), slurp(fb[i]));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Svg, UnwritableDirectory) {
  const fs::path blocker = fs::temp_directory_path() / "pirrt_plots_blocker";
  fs::remove_all(blocker);
  std::ofstream(blocker) << "x";
  MissionResult m;
  m.executed.states = Matrix::Zero(3, 1);
  m.executed.times = Vector::Zero(1);
  EXPECT_THROW(emit_plots(open_world(), m, blocker / "sub"), std::runtime_error);
  fs::remove(blocker);
}

TEST(Svg, OutcomePanels) {
  ExperimentConfig c = small(3);
  c.alpha = 0.5;
  c.keep_paths = true;
  const auto r = run_experiment(c);
  const Environment env = resolve_scenario(c).environment;
  std::vector<Outcome> outcomes;
  for (const auto& t : r.trials) outcomes.push_back(t.outcome);
  const std::string svg = outcomes_svg(env, r.paths, outcomes);
  const std::size_t hits = static_cast<std::size_t>(r.aggregate.collisions);
  EXPECT_EQ(count(svg, "class=\"collision\""), hits);
  EXPECT_EQ(count(svg, "class=\"success\""), r.trials.size() - hits);
  EXPECT_NE(svg.find("collision: " + std::to_string(hits)), std::string::npos);
  EXPECT_EQ(count(svg, "class=\"obstacle\""), 2 * env.obstacles().size());

  outcomes.pop_back();
  EXPECT_THROW(outcomes_svg(env, r.paths, outcomes), ContractError);

  const fs::path dir = fs::temp_directory_path() / "pirrt_plots_outcomes";
  EXPECT_EQ(emit_plots(env, r, dir).front().filename(), "outcomes.svg");
  ExperimentResult bare = r;
  bare.paths.clear();
  EXPECT_THROW(emit_plots(env, bare, dir), ContractError);
  fs::remove_all(dir);
}
