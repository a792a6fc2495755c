// Command-line front end: single missions, Monte Carlo batches, sweeps,
// preset export and the scalar duality check.

#include "pirrt/duality_check.hpp"
#include "pirrt/experiment.hpp"
#include "pirrt/plots.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pirrt;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;
constexpr int kCheckFailed = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

struct CommonOptions {
  std::string config_file;
  std::string scenario;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::string algorithm;
  std::optional<Index> trials;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_trials) {
  cmd->add_option("--config", o.config_file, "Experiment config (JSON); flags below override it");
  cmd->add_option("--scenario", o.scenario, "Preset id (single_slit, double_slit, open) or scenario JSON file");
  cmd->add_option("--alpha", o.alpha, "Noise intensity alpha (default 0.25)");
  cmd->add_option("--seed", o.seed, "Master seed (default 1)");
  cmd->add_option("--algorithm", o.algorithm, "rrt or pirrt (default pirrt)")
      ->check(CLI::IsMember({"rrt", "pirrt"}));
  if (with_trials) cmd->add_option("--trials", o.trials, "Number of trials (default 100)")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c;
  if (!o.config_file.empty()) c = config_from_json(read_json(o.config_file));
  if (!o.scenario.empty()) {
    if (fs::is_regular_file(o.scenario)) {
      c.environment = read_json(o.scenario);
      c.scenario = fs::path(o.scenario).stem().string();
    } else {
      c.environment.reset();
      c.scenario = o.scenario;
    }
  }
  if (o.alpha) c.alpha = *o.alpha;
  if (o.seed) c.master_seed = *o.seed;
  if (!o.algorithm.empty()) c.algorithm = algorithm_from_string(o.algorithm);
  if (o.trials) c.trials = *o.trials;
  // Round-trip through JSON so flag values get the same validation as files.
  c = config_from_json(to_json(c), c);
  resolve_scenario(c);
  return c;
}

int cmd_plan(const CommonOptions& o, const std::string& out_dir) {
  ExperimentConfig c = resolve(o);
  c.keep_paths = true;
  c.controller.keep_trees = true;
  const Scenario s = resolve_scenario(c);
  const MissionResult m = run_trial(c, 0);

  const fs::path dir(out_dir);
  const std::string header = "# config: " + to_json(c).dump() + "\n# geometry_hash: " + geometry_hash(s) + "\n";
  write_text(dir / "mission.json", mission_to_json(m, to_json(c)).dump(2) + "\n");
  write_text(dir / "executed.csv", trajectory_csv(m.executed, header));
  if (!m.cycles.empty()) {
    const ReplanCycleRecord& first = m.cycles.front();
    write_text(dir / "baseline.csv", trajectory_csv(first.baseline, header));
    if (first.tree) {
      write_text(dir / "tree_vertices.csv", header + tree_vertices_csv(*first.tree));
      write_text(dir / "tree_edges.csv", header + tree_edges_csv(*first.tree));
    }
  }
  const auto plots = emit_plots(s.environment, m, dir);
  std::printf("%s %s alpha=%g seed=%llu: %s via %s, terminal cost %.4f, %zu cycles\n", c.scenario.c_str(),
              std::string(to_string(c.algorithm)).c_str(), c.alpha, static_cast<unsigned long long>(c.master_seed),
              std::string(to_string(m.outcome)).c_str(), std::string(to_string(m.corridor)).c_str(),
              m.terminal_cost, m.cycles.size());
  std::printf("wrote %s (%zu plots)\n", dir.string().c_str(), plots.size());
  return kOk;
}

void progress(const ExperimentConfig& c, const TrialSummary& t) {
  std::fprintf(stderr, "\r%s alpha=%g trial %lld/%lld", std::string(to_string(c.algorithm)).c_str(), c.alpha,
               static_cast<long long>(t.trial + 1), static_cast<long long>(c.trials));
  if (t.trial + 1 == c.trials) std::fputc('\n', stderr);
}

int cmd_montecarlo(const CommonOptions& o, const std::string& out_dir, bool with_plots, bool timing, bool quiet) {
  ExperimentConfig c = resolve(o);
  if (with_plots) c.keep_paths = true;
  SweepReport report;
  report.results.push_back(run_experiment(c, quiet ? ProgressFn{} : ProgressFn(progress)));
  std::cout << format_table(report);
  if (!out_dir.empty()) {
    write_report(report, out_dir, timing);
    if (with_plots) emit_plots(resolve_scenario(c).environment, report.results.front(), out_dir);
  }
  return kOk;
}

int cmd_sweep(const std::string& config_file, const std::string& out_dir, bool timing, bool quiet) {
  const auto configs = sweep_configs_from_json(read_json(config_file));
  const SweepReport report = sweep(configs, quiet ? ProgressFn{} : ProgressFn(progress));
  std::cout << format_table(report);
  if (!out_dir.empty()) write_report(report, out_dir, timing);
  return kOk;
}

int cmd_scenario(const std::string& id, const std::string& out_file) {
  const std::string text = scenario_to_json(scenario_preset(id)).dump(2) + "\n";
  if (out_file.empty())
    std::cout << text;
  else
    write_text(out_file, text);
  return kOk;
}

int cmd_duality(const QuadraticToy& toy, double tolerance) {
  const DualityReport r = check_duality(toy);
  std::printf("scalar toy: rho=%g x0=%g t_f=%g dt=%g N=%lld\n", toy.rho, toy.x0, toy.t_final, toy.dt,
              static_cast<long long>(toy.samples));
  std::printf("free energy  estimate %.6f (se %.6f)  exact %.6f  rel. error %.4f%%\n", r.estimate.value,
              r.estimate.standard_error, r.exact, 100.0 * r.relative_error);
  for (const PolicyCheck& p : r.policies)
    std::printf("policy u=%+.2f  mean cost %.6f (se %.6f)  gap %+.6f  %s\n", p.control, p.cost.mean,
                p.cost.standard_error, p.gap.gap, p.gap.violated ? "VIOLATED" : "ok");
  const bool ok = r.passed(tolerance);
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-integral control with RRT sampling policies"};
  app.require_subcommand(1);

  CommonOptions plan_opts;
  std::string plan_out = "pirrt_plan";
  auto* plan = app.add_subcommand("plan", "Run one mission and write its record, CSVs and SVG plots");
  add_common(plan, plan_opts, false);
  plan->add_option("--out", plan_out, "Output directory")->capture_default_str();

  CommonOptions mc_opts;
  std::string mc_out;
  bool mc_plots = false, mc_timing = false, mc_quiet = false;
  auto* mc = app.add_subcommand("montecarlo", "Run a seeded batch and print the outcome table");
  add_common(mc, mc_opts, true);
  mc->add_option("--out", mc_out, "Write report.json, table.csv and trial CSVs here");
  mc->add_flag("--plots", mc_plots, "Also write outcomes.svg (needs --out)");
  mc->add_flag("--timing", mc_timing, "Include wall times in written files");
  mc->add_flag("--quiet", mc_quiet, "No progress output");

  std::string sweep_config, sweep_out;
  bool sweep_timing = false, sweep_quiet = false;
  auto* sw = app.add_subcommand("sweep", "Run every configuration of a sweep file; prints the combined table");
  sw->add_option("--config", sweep_config, "Sweep file (JSON)")->required();
  sw->add_option("--out", sweep_out, "Write the combined report here");
  sw->add_flag("--timing", sweep_timing, "Include wall times in written files");
  sw->add_flag("--quiet", sweep_quiet, "No progress output");

  std::string scenario_id, scenario_out;
  auto* scen = app.add_subcommand("scenario", "Print a preset as a scenario JSON document");
  scen->add_option("id", scenario_id, "Preset id")->required()->check(CLI::IsMember(scenario_preset_ids()));
  scen->add_option("--out", scenario_out, "Write to this file instead of stdout");

  QuadraticToy toy;
  double tolerance = 0.02;
  auto* dual = app.add_subcommand("check-duality", "Free-energy estimate vs closed form and policy costs");
  dual->add_option("--samples", toy.samples, "Rollouts per estimate")->capture_default_str()->check(CLI::Range(2, 100000000));
  dual->add_option("--rho", toy.rho, "|rho|; noise scale is 1/sqrt(rho)")->capture_default_str()->check(CLI::PositiveNumber);
  dual->add_option("--x0", toy.x0, "Initial state")->capture_default_str();
  dual->add_option("--seed", toy.seed, "Seed")->capture_default_str();
  dual->add_option("--tolerance", tolerance, "Allowed relative error of the estimate")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*plan) return cmd_plan(plan_opts, plan_out);
    if (*mc) {
      if (mc_plots && mc_out.empty()) throw UsageError("--plots needs --out");
      return cmd_montecarlo(mc_opts, mc_out, mc_plots, mc_timing, mc_quiet);
    }
    if (*sw) return cmd_sweep(sweep_config, sweep_out, sweep_timing, sweep_quiet);
    if (*scen) return cmd_scenario(scenario_id, scenario_out);
    if (*dual) return cmd_duality(toy, tolerance);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
