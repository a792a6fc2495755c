#pragma once

#include "pirrt/pi_rrt.hpp"
#include "pirrt/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pirrt {

using json = nlohmann::json;

/// One Monte Carlo study: a scenario, an algorithm, a noise level and every
/// tunable that can change the result.
struct ExperimentConfig {
  std::string scenario = "double_slit";
  Algorithm algorithm = Algorithm::PiRrt;
  double alpha = 0.25;
  Index trials = 100;
  std::uint64_t master_seed = 1;
  bool paired = false;  // share every random stream between algorithms
  CarParams car;
  double terminal_weight = 1.0;
  ControllerParams controller;
  std::optional<json> environment;  // full scenario document replacing the preset
  bool keep_paths = false;          // retain executed trajectories for plots
};

json to_json(const ExperimentConfig& c);
/// Reads the keys present in j on top of `base`; unknown keys are an error.
ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {});

json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const json& j);
Scenario load_scenario_file(const std::filesystem::path& path);
Scenario resolve_scenario(const ExperimentConfig& c);
/// Content hash of the canonical scenario document, 16 hex digits.
std::string geometry_hash(const Scenario& s);

/// Sub-seed of trial i: hash(master, scenario, algorithm, alpha, i). In paired
/// mode the algorithm is left out so both algorithms draw identical noise.
std::uint64_t trial_seed(const ExperimentConfig& c, Index trial);

struct TrialSummary {
  Index trial = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::GoalMiss;
  Corridor corridor = Corridor::None;
  double terminal_cost = 0.0;
  Index cycles = 0;
  double wall_time_s = 0.0;
};

/// Table row: successes per corridor plus failures; the entries always sum
/// to `trials`.
struct AggregateRow {
  Algorithm algorithm = Algorithm::PiRrt;
  double alpha = 0.0;
  std::vector<Corridor> corridors;
  std::vector<Index> success_by_corridor;
  Index success_uncrossed = 0;
  Index fail = 0;
  Index collisions = 0;
  Index goal_misses = 0;
  Index timeouts = 0;
  Index trials = 0;

  Index successes() const { return trials - fail; }
  Index total() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string geometry_hash;
  std::vector<TrialSummary> trials;
  AggregateRow aggregate;
  std::vector<Trajectory> paths;  // only with keep_paths
};

using ProgressFn = std::function<void(const ExperimentConfig&, const TrialSummary&)>;

MissionResult run_trial(const ExperimentConfig& c, Index trial);
ExperimentResult run_experiment(const ExperimentConfig& c, const ProgressFn& progress = {});

struct SweepReport {
  std::vector<ExperimentResult> results;
};

SweepReport sweep(std::span<const ExperimentConfig> configs, const ProgressFn& progress = {});

/// Expands a sweep document: shared fields plus either "runs" (list of
/// per-run overrides) or the "algorithms" x "alphas" grid.
std::vector<ExperimentConfig> sweep_configs_from_json(const json& j);

AggregateRow aggregate(const ExperimentConfig& c, const Environment& env, std::span<const TrialSummary> trials);

// Serialisation. Every file embeds the resolved config and geometry hash;
// nothing time-dependent is written unless include_timing is set.
json to_json(const ExperimentResult& r, bool include_timing = false);
json to_json(const SweepReport& r, bool include_timing = false);
std::string trials_csv(const ExperimentResult& r, bool include_timing = false);
std::string table_csv(const SweepReport& r);
std::string format_table(const SweepReport& r);

json mission_to_json(const MissionResult& m, const json& config_echo);
std::string tree_vertices_csv(const TreeGraph& tree);
std::string tree_edges_csv(const TreeGraph& tree);
std::string trajectory_csv(const Trajectory& t, const std::string& header_comment = {});

void write_text(const std::filesystem::path& path, const std::string& text);

/// Writes report.json, table.csv and trials_<k>.csv into dir; returns the
/// paths written.
std::vector<std::filesystem::path> write_report(const SweepReport& r, const std::filesystem::path& dir,
                                                bool include_timing = false);

}  // namespace pirrt
