#include "pirrt/experiment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace pirrt;
namespace fs = std::filesystem;

namespace {

// Small, quick configuration on the open world.
ExperimentConfig quick(double alpha = 0.1, Index trials = 3) {
  ExperimentConfig c;
  c.scenario = "open";
  c.alpha = alpha;
  c.trials = trials;
  c.master_seed = 7;
  c.controller.bundle_size = 20;
  c.controller.planner.max_iterations = 1500;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pirrt_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Experiment, DeterministicOpenWorldSingleTrial) {
  const auto r = run_experiment(quick(0.0, 1));
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.trials[0].outcome, Outcome::Success);
  EXPECT_EQ(r.aggregate.fail, 0);
  EXPECT_EQ(r.aggregate.successes(), 1);
  EXPECT_EQ(r.aggregate.success_uncrossed, 1);  // no block, no corridors
}

TEST(Aggregate, PartitionsTrials) {
  ExperimentConfig c;
  const Environment env = double_slit_world();
  std::vector<TrialSummary> t;
  const auto add = [&](Outcome o, Corridor k) { t.push_back({static_cast<Index>(t.size()), 0, o, k, 0.0, 1, 0.0}); };
  add(Outcome::Success, Corridor::BottomSlit);
  add(Outcome::Success, Corridor::BottomSlit);
  add(Outcome::Success, Corridor::TopCorner);
  add(Outcome::Success, Corridor::None);
  add(Outcome::Collision, Corridor::TopSlit);
  add(Outcome::GoalMiss, Corridor::BottomCorner);
  add(Outcome::Timeout, Corridor::None);
  const AggregateRow a = aggregate(c, env, t);
  EXPECT_EQ(a.trials, 7);
  EXPECT_EQ(a.total(), 7);
  ASSERT_EQ(a.corridors.size(), 4u);
  EXPECT_EQ(a.success_by_corridor, (std::vector<Index>{0, 2, 0, 1}));
  EXPECT_EQ(a.success_uncrossed, 1);
  EXPECT_EQ(a.fail, 3);
  EXPECT_EQ(a.collisions, 1);
  EXPECT_EQ(a.goal_misses, 1);
  EXPECT_EQ(a.timeouts, 1);
}

TEST(Seeds, TrialIsolation) {
  const auto a = run_experiment(quick(0.25, 2));
  const auto b = run_experiment(quick(0.25, 4));
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.trials[i].seed, b.trials[i].seed);
    EXPECT_EQ(a.trials[i].terminal_cost, b.trials[i].terminal_cost);
    EXPECT_EQ(a.trials[i].outcome, b.trials[i].outcome);
  }
  ExperimentConfig c = quick();
  std::set<std::uint64_t> seeds;
  for (Index i = 0; i < 100; ++i) seeds.insert(trial_seed(c, i));
  EXPECT_EQ(seeds.size(), 100u);
  ExperimentConfig other = c;
  other.master_seed = 8;
  EXPECT_NE(trial_seed(c, 0), trial_seed(other, 0));
}

TEST(Seeds, PairedModeSharesStreams) {
  ExperimentConfig rrt = quick(), pi = quick();
  rrt.algorithm = Algorithm::Rrt;
  EXPECT_NE(trial_seed(rrt, 3), trial_seed(pi, 3));
  rrt.paired = pi.paired = true;
  EXPECT_EQ(trial_seed(rrt, 3), trial_seed(pi, 3));
  ExperimentConfig a = quick(0.25), b = quick(0.5);
  EXPECT_NE(trial_seed(a, 0), trial_seed(b, 0));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = quick(0.5, 11);
  c.controller.weighting = WeightingMode::WholePath;
  c.controller.planner.steer_noise_scale = 0.3;
  c.controller.planner.feedforward_limit.reset();
  c.controller.execute_steps = 7;
  c.terminal_weight = 0.5;
  const json j = to_json(c);
  const ExperimentConfig back = config_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.controller.weighting, WeightingMode::WholePath);
  EXPECT_EQ(*back.controller.planner.steer_noise_scale, 0.3);
  EXPECT_FALSE(back.controller.planner.feedforward_limit);
  EXPECT_EQ(back.controller.execute_steps, 7);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(config_from_json({{"trails", 3}}), ContractError);
  EXPECT_THROW(config_from_json({{"planner", {{"iterations", 3}}}}), ContractError);
  EXPECT_THROW(config_from_json({{"controller", {{"weighting", "median"}}}}), ContractError);
  EXPECT_THROW(config_from_json({{"algorithm", "astar"}}), ContractError);
}

TEST(Config, InvalidScenarioId) {
  ExperimentConfig c = quick();
  c.scenario = "maze";
  EXPECT_THROW(run_experiment(c), ContractError);
}

TEST(Sweep, GridExpansion) {
  const json doc = {{"scenario", "double_slit"},
                    {"trials", 5},
                    {"algorithms", {"rrt", "pirrt"}},
                    {"alphas", {0.25, 0.5, 1.0}}};
  const auto cfgs = sweep_configs_from_json(doc);
  ASSERT_EQ(cfgs.size(), 6u);
  EXPECT_EQ(cfgs[0].algorithm, Algorithm::Rrt);
  EXPECT_EQ(cfgs[4].alpha, 0.5);
  EXPECT_EQ(cfgs[5].algorithm, Algorithm::PiRrt);
  for (const auto& c : cfgs) {
    EXPECT_EQ(c.trials, 5);
    EXPECT_EQ(c.scenario, "double_slit");
  }
  const json runs = {{"trials", 2}, {"runs", {{{"alpha", 0.1}}, {{"alpha", 0.2}, {"algorithm", "rrt"}}}}};
  const auto r = sweep_configs_from_json(runs);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1].algorithm, Algorithm::Rrt);
  EXPECT_EQ(r[1].trials, 2);
  EXPECT_EQ(sweep_configs_from_json({{"alpha", 0.3}}).size(), 1u);
}

TEST(Sweep, SingleConfigMatchesRunExperiment) {
  const ExperimentConfig c = quick(0.25, 2);
  const std::vector<ExperimentConfig> one{c};
  EXPECT_EQ(to_json(sweep(one)).at("experiments").at(0).dump(), to_json(run_experiment(c)).dump());
  EXPECT_THROW(sweep(std::span<const ExperimentConfig>{}), ContractError);
}

TEST(Scenario, JsonRoundTripAndHash) {
  for (const auto& id : scenario_preset_ids()) {
    const Scenario s = scenario_preset(id);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(s));
    EXPECT_EQ(geometry_hash(back), geometry_hash(s));
    EXPECT_EQ(geometry_hash(s).size(), 16u);
  }
  EXPECT_NE(geometry_hash(scenario_preset("single_slit")), geometry_hash(scenario_preset("double_slit")));
  json j = scenario_to_json(scenario_preset("open"));
  j["obstacles"].push_back({{"x_min", 0}, {"x_max", 1}, {"y_min", 0}, {"y_max", 1}});
  EXPECT_NE(geometry_hash(scenario_from_json(j)), geometry_hash(scenario_preset("open")));
  j["color"] = "red";
  EXPECT_THROW(scenario_from_json(j), ContractError);
}

TEST(Scenario, ShippedFilesMatchPresets) {
  for (const auto& id : scenario_preset_ids()) {
    const fs::path file = fs::path(PIRRT_SOURCE_DIR) / "scenarios" / (id + ".json");
    ASSERT_TRUE(fs::exists(file)) << file;
    EXPECT_EQ(geometry_hash(load_scenario_file(file)), geometry_hash(scenario_preset(id))) << id;
  }
}

TEST(Scenario, EnvironmentOverrideUsed) {
  ExperimentConfig c = quick(0.0, 1);
  json env = scenario_to_json(scenario_preset("open"));
  env["obstacles"].push_back({{"x_min", -2}, {"x_max", 2}, {"y_min", -10}, {"y_max", 10}});  // wall
  c.environment = env;
  const auto r = run_experiment(c);
  EXPECT_NE(r.trials[0].outcome, Outcome::Success);
  EXPECT_EQ(r.geometry_hash, geometry_hash(scenario_from_json(env)));
}

TEST(Outputs, ByteIdenticalReruns) {
  const ExperimentConfig c = quick(0.25, 2);
  const std::vector<ExperimentConfig> cfgs{c};
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  const auto fa = write_report(sweep(cfgs), a);
  const auto fb = write_report(sweep(cfgs), b);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    EXPECT_EQ(fa[i].filename(), fb[i].filename());
    EXPECT_EQ(slurp(fa[i]), slurp(fb[i])) << fa[i];
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Outputs, HeadersEchoConfig) {
  const auto r = run_experiment(quick(0.1, 2));
  const std::string csv = trials_csv(r);
  std::istringstream lines(csv);
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  ASSERT_EQ(l1.rfind("# config: ", 0), 0u);
  EXPECT_EQ(config_from_json(json::parse(l1.substr(10))).trials, 2);
  EXPECT_EQ(l2, "# geometry_hash: " + geometry_hash(scenario_preset("open")));
  EXPECT_EQ(l3, "trial,seed,outcome,corridor,terminal_cost,cycles");
  EXPECT_NE(trials_csv(r, true).find(",wall_time_s\n"), std::string::npos);

  SweepReport rep;
  rep.results.push_back(r);
  EXPECT_NE(table_csv(rep).find("scenario,algorithm,alpha,uncrossed,fail,collisions,goal_misses,timeouts,trials\n"),
            std::string::npos);
  const json doc = to_json(rep);
  EXPECT_EQ(doc["experiments"][0]["geometry_hash"], geometry_hash(scenario_preset("open")));
  EXPECT_FALSE(doc["experiments"][0]["trials"][0].contains("wall_time_s"));
}

TEST(Outputs, TableColumnsFollowCorridors) {
  ExperimentResult r;
  r.config.scenario = "double_slit";
  r.aggregate = aggregate(r.config, double_slit_world(), {});
  SweepReport rep;
  rep.results.push_back(r);
  EXPECT_NE(table_csv(rep).find("scenario,algorithm,alpha,bottom_corner,bottom_slit,top_slit,top_corner,uncrossed"),
            std::string::npos);
}

TEST(Outputs, UnwritablePath) {
  const fs::path blocker = scratch("blocker");
  write_text(blocker, "x");
  EXPECT_THROW(write_text(blocker / "inner.txt", "y"), std::runtime_error);
  fs::remove(blocker);
}

TEST(Mission, TimeoutIsAFailure) {
  ExperimentConfig c = quick(0.25, 1);
  c.controller.mission_timeout_s = 0.0;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.trials[0].outcome, Outcome::Timeout);
  EXPECT_EQ(r.aggregate.timeouts, 1);
  EXPECT_EQ(r.aggregate.fail, 1);
}

TEST(Mission, JsonRecordUsesNullForInfinity) {
  ExperimentConfig c = quick(0.25, 1);
  c.keep_paths = true;
  MissionResult m = run_trial(c, 0);
  ASSERT_FALSE(m.cycles.empty());
  m.cycles[0].bundle_costs(0) = kInfinity;
  const json j = mission_to_json(m, to_json(c));
  EXPECT_TRUE(j["cycles"][0]["bundle_costs"][0].is_null());
  EXPECT_EQ(j["executed_steps"], m.executed.steps());
  EXPECT_EQ(j["config"], to_json(c));
}

TEST(Mission, TreeAndTrajectoryCsv) {
  ExperimentConfig c = quick(0.25, 1);
  c.controller.keep_trees = true;
  const MissionResult m = run_trial(c, 0);
  const TreeGraph& tree = *m.cycles.front().tree;
  const std::string v = tree_vertices_csv(tree);
  EXPECT_EQ(v.substr(0, v.find('\n')), "index,parent,x,y,theta,t");
  EXPECT_EQ(std::count(v.begin(), v.end(), '\n'), tree.size() + 1);
  const std::string e = tree_edges_csv(tree);
  EXPECT_EQ(e.substr(0, e.find('\n')), "edge,parent,point,x,y,t");
  const std::string t = trajectory_csv(m.executed, "# hello\n");
  EXPECT_EQ(t.substr(0, t.find('\n', 9)), "# hello\nt,x0,x1,x2,u0,dw0");
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), m.executed.size() + 2);
}
