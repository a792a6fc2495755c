#include "pirrt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace pirrt {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json vec_json(const ConstVectorRef& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// +inf costs serialise as null.
json costs_json(const ConstVectorRef& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i)))
      a.push_back(v(i));
    else
      a.push_back(nullptr);
  }
  return a;
}

Vector json_vec(const json& a) {
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
  return v;
}

json rect_json(const Rect& r) {
  return {{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

Rect json_rect(const json& j) {
  return {j.at("x_min").get<double>(), j.at("x_max").get<double>(), j.at("y_min").get<double>(),
          j.at("y_max").get<double>()};
}

std::string weighting_name(WeightingMode m) { return m == WeightingMode::CostToGo ? "cost_to_go" : "whole_path"; }

WeightingMode weighting_from(const std::string& s) {
  if (s == "cost_to_go") return WeightingMode::CostToGo;
  if (s == "whole_path") return WeightingMode::WholePath;
  throw ContractError("unknown weighting mode: " + s);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key())) throw ContractError(std::string("unknown key '") + it.key() + "' in " + where);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string comment_header(const json& config, const std::string& hash) {
  return "# config: " + config.dump() + "\n# geometry_hash: " + hash + "\n";
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  const auto& p = c.controller;
  json planner = {{"steer_samples", p.planner.steer_samples},
                  {"horizon_steps", p.planner.horizon_steps},
                  {"max_iterations", p.planner.max_iterations},
                  {"rejection_budget", p.planner.rejection_budget},
                  {"dt", p.planner.dt},
                  {"metric",
                   {{"angle_weight", p.planner.metric.angle_weight},
                    {"time_weight", p.planner.metric.time_weight}}},
                  {"steer_noise_scale", p.planner.steer_noise_scale ? json(*p.planner.steer_noise_scale) : json()},
                  {"feedforward_limit", p.planner.feedforward_limit ? json(*p.planner.feedforward_limit) : json()},
                  {"fallback_min_duration", p.planner.fallback_min_duration}};
  json controller = {{"bundle_size", p.bundle_size},
                     {"execute_steps", p.execute_steps},
                     {"control_limit", p.bounds.upper.size() ? p.bounds.upper(0) : 1.0},
                     {"weighting", weighting_name(p.weighting)},
                     {"correction_iterations", p.correction_iterations},
                     {"replan_each_cycle", p.replan_each_cycle},
                     {"mission_timeout_s", p.mission_timeout_s}};
  json j = {{"scenario", c.scenario},
            {"algorithm", std::string(to_string(c.algorithm))},
            {"alpha", c.alpha},
            {"trials", c.trials},
            {"master_seed", c.master_seed},
            {"paired", c.paired},
            {"car", {{"speed", c.car.speed}, {"turn_constant", c.car.turn_constant}}},
            {"cost", {{"terminal_weight", c.terminal_weight}}},
            {"controller", controller},
            {"planner", planner}};
  if (c.environment) j["environment"] = *c.environment;
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  reject_unknown(j,
                 {"scenario", "algorithm", "alpha", "trials", "master_seed", "paired", "car", "cost", "controller",
                  "planner", "environment", "keep_paths"},
                 "experiment config");
  if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
  if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j["algorithm"].get<std::string>());
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("trials")) c.trials = j["trials"].get<Index>();
  if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("paired")) c.paired = j["paired"].get<bool>();
  if (j.contains("keep_paths")) c.keep_paths = j["keep_paths"].get<bool>();
  if (j.contains("car")) {
    const json& car = j["car"];
    reject_unknown(car, {"speed", "turn_constant"}, "car");
    c.car.speed = car.value("speed", c.car.speed);
    c.car.turn_constant = car.value("turn_constant", c.car.turn_constant);
  }
  if (j.contains("cost")) {
    reject_unknown(j["cost"], {"terminal_weight"}, "cost");
    c.terminal_weight = j["cost"].value("terminal_weight", c.terminal_weight);
  }
  auto& p = c.controller;
  if (j.contains("controller")) {
    const json& q = j["controller"];
    reject_unknown(q,
                   {"bundle_size", "execute_steps", "control_limit", "weighting", "correction_iterations",
                    "replan_each_cycle", "mission_timeout_s"},
                   "controller");
    p.bundle_size = q.value("bundle_size", p.bundle_size);
    p.execute_steps = q.value("execute_steps", p.execute_steps);
    if (q.contains("control_limit")) {
      const double limit = q["control_limit"].get<double>();
      if (!(limit > 0.0)) throw ContractError("controller: control_limit must be positive");
      p.bounds = ControlBounds::symmetric(1, limit);
      p.planner.feedforward_limit = limit;
    }
    if (q.contains("weighting")) p.weighting = weighting_from(q["weighting"].get<std::string>());
    p.correction_iterations = q.value("correction_iterations", p.correction_iterations);
    p.replan_each_cycle = q.value("replan_each_cycle", p.replan_each_cycle);
    p.mission_timeout_s = q.value("mission_timeout_s", p.mission_timeout_s);
  }
  if (j.contains("planner")) {
    const json& q = j["planner"];
    reject_unknown(q,
                   {"steer_samples", "horizon_steps", "max_iterations", "rejection_budget", "dt", "metric",
                    "steer_noise_scale", "feedforward_limit", "fallback_min_duration"},
                   "planner");
    p.planner.steer_samples = q.value("steer_samples", p.planner.steer_samples);
    p.planner.horizon_steps = q.value("horizon_steps", p.planner.horizon_steps);
    p.planner.max_iterations = q.value("max_iterations", p.planner.max_iterations);
    p.planner.rejection_budget = q.value("rejection_budget", p.planner.rejection_budget);
    p.planner.dt = q.value("dt", p.planner.dt);
    if (q.contains("metric")) {
      reject_unknown(q["metric"], {"angle_weight", "time_weight"}, "metric");
      p.planner.metric.angle_weight = q["metric"].value("angle_weight", p.planner.metric.angle_weight);
      p.planner.metric.time_weight = q["metric"].value("time_weight", p.planner.metric.time_weight);
    }
    p.planner.fallback_min_duration = q.value("fallback_min_duration", p.planner.fallback_min_duration);
    if (q.contains("feedforward_limit")) {
      if (q["feedforward_limit"].is_null())
        p.planner.feedforward_limit.reset();
      else
        p.planner.feedforward_limit = q["feedforward_limit"].get<double>();
    }
    if (q.contains("steer_noise_scale")) {
      if (q["steer_noise_scale"].is_null())
        p.planner.steer_noise_scale.reset();
      else
        p.planner.steer_noise_scale = q["steer_noise_scale"].get<double>();
    }
  }
  if (j.contains("environment")) c.environment = j["environment"];
  if (c.trials < 1) throw ContractError("experiment config: trials must be >= 1");
  if (!(c.alpha >= 0.0)) throw ContractError("experiment config: alpha must be >= 0");
  return c;
}

json scenario_to_json(const Scenario& s) {
  const Environment& e = s.environment;
  json obstacles = json::array();
  for (const Rect& r : e.obstacles()) obstacles.push_back(rect_json(r));
  json corridors = json::array();
  for (const CorridorBand& b : e.corridors())
    corridors.push_back({{"label", std::string(to_string(b.label))}, {"y_lo", b.y_lo}, {"y_hi", b.y_hi}});
  const GoalSet& g = e.goal();
  return {{"name", e.name()},
          {"workspace", rect_json(e.workspace())},
          {"obstacles", obstacles},
          {"goal",
           {{"center", {g.center_x, g.center_y}}, {"radius", g.radius}, {"time_window", {g.t_lo, g.t_hi}}}},
          {"corridors", corridors},
          {"start", {{"state", vec_json(s.start_state)}, {"time", s.t_init}}},
          {"final_time", s.t_final}};
}

Scenario scenario_from_json(const json& j) {
  reject_unknown(j, {"name", "workspace", "obstacles", "goal", "corridors", "start", "final_time"}, "scenario");
  std::vector<Rect> obstacles;
  for (const json& r : j.value("obstacles", json::array())) obstacles.push_back(json_rect(r));
  std::vector<CorridorBand> corridors;
  for (const json& b : j.value("corridors", json::array()))
    corridors.push_back({corridor_from_string(b.at("label").get<std::string>()), b.at("y_lo").get<double>(),
                         b.at("y_hi").get<double>()});
  const json& g = j.at("goal");
  GoalSet goal{g.at("center")[0].get<double>(), g.at("center")[1].get<double>(), g.at("radius").get<double>(),
               g.at("time_window")[0].get<double>(), g.at("time_window")[1].get<double>()};
  Scenario s;
  s.environment = Environment(j.value("name", std::string("custom")), json_rect(j.at("workspace")),
                              std::move(obstacles), goal, std::move(corridors));
  s.start_state = json_vec(j.at("start").at("state"));
  s.t_init = j.at("start").value("time", 0.0);
  s.t_final = j.at("final_time").get<double>();
  if (s.t_final < s.t_init) throw ContractError("scenario: final_time precedes start time");
  if (!(goal.t_hi <= s.t_final + 1e-9)) throw ContractError("scenario: goal window ends after final_time");
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  return scenario_from_json(json::parse(in));
}

Scenario resolve_scenario(const ExperimentConfig& c) {
  if (c.environment) return scenario_from_json(*c.environment);
  return scenario_preset(c.scenario);
}

std::string geometry_hash(const Scenario& s) { return hex64(hash_string(scenario_to_json(s).dump())); }

std::uint64_t trial_seed(const ExperimentConfig& c, Index trial) {
  const std::uint64_t alg = c.paired ? 0 : hash_string(to_string(c.algorithm));
  return derive_seed(c.master_seed,
                     {hash_string(c.scenario), alg, hash_double(c.alpha), static_cast<std::uint64_t>(trial)});
}

Index AggregateRow::total() const {
  Index t = success_uncrossed + fail;
  for (Index n : success_by_corridor) t += n;
  return t;
}

MissionResult run_trial(const ExperimentConfig& c, Index trial) {
  const Scenario s = resolve_scenario(c);
  CarParams car = c.car;
  car.noise_scale = c.alpha;
  const DynamicsModel model = car_dynamics(car);
  const CostFunctional cost = goal_cost(s.environment, c.terminal_weight);
  ControllerParams params = c.controller;
  if (!c.keep_paths) params.keep_bundles = false;
  const MissionContext ctx{model, s.environment, cost, params, s.t_final};
  const StreamKey key{trial_seed(c, trial), static_cast<std::uint64_t>(trial), 0};
  return run(ctx, {s.start_state, s.t_init}, c.algorithm, key);
}

AggregateRow aggregate(const ExperimentConfig& c, const Environment& env, std::span<const TrialSummary> trials) {
  AggregateRow row;
  row.algorithm = c.algorithm;
  row.alpha = c.alpha;
  for (const CorridorBand& b : env.corridors()) row.corridors.push_back(b.label);
  row.success_by_corridor.assign(row.corridors.size(), 0);
  for (const TrialSummary& t : trials) {
    ++row.trials;
    switch (t.outcome) {
      case Outcome::Success: {
        auto it = std::find(row.corridors.begin(), row.corridors.end(), t.corridor);
        if (t.corridor == Corridor::None || it == row.corridors.end())
          ++row.success_uncrossed;
        else
          ++row.success_by_corridor[static_cast<std::size_t>(it - row.corridors.begin())];
        continue;
      }
      case Outcome::Collision: ++row.collisions; break;
      case Outcome::GoalMiss: ++row.goal_misses; break;
      case Outcome::Timeout: ++row.timeouts; break;
    }
    ++row.fail;
  }
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& c, const ProgressFn& progress) {
  const Scenario s = resolve_scenario(c);
  ExperimentResult r;
  r.config = c;
  r.geometry_hash = geometry_hash(s);
  for (Index i = 0; i < c.trials; ++i) {
    MissionResult m = run_trial(c, i);
    TrialSummary t;
    t.trial = i;
    t.seed = trial_seed(c, i);
    t.outcome = m.outcome;
    t.corridor = m.corridor;
    t.terminal_cost = m.terminal_cost;
    t.cycles = static_cast<Index>(m.cycles.size());
    t.wall_time_s = m.wall_time_s;
    if (c.keep_paths) r.paths.push_back(std::move(m.executed));
    if (progress) progress(c, t);
    r.trials.push_back(t);
  }
  r.aggregate = aggregate(c, s.environment, r.trials);
  return r;
}

SweepReport sweep(std::span<const ExperimentConfig> configs, const ProgressFn& progress) {
  if (configs.empty()) throw ContractError("sweep: no configurations");
  SweepReport out;
  for (const ExperimentConfig& c : configs) out.results.push_back(run_experiment(c, progress));
  return out;
}

std::vector<ExperimentConfig> sweep_configs_from_json(const json& j) {
  json shared = j;
  json runs = json::array();
  if (j.contains("runs")) {
    runs = j["runs"];
    shared.erase("runs");
  }
  json algorithms = shared.contains("algorithms") ? shared["algorithms"] : json();
  json alphas = shared.contains("alphas") ? shared["alphas"] : json();
  shared.erase("algorithms");
  shared.erase("alphas");
  const ExperimentConfig base = config_from_json(shared);

  std::vector<ExperimentConfig> out;
  if (!algorithms.is_null() || !alphas.is_null()) {
    if (algorithms.is_null()) algorithms = json::array({std::string(to_string(base.algorithm))});
    if (alphas.is_null()) alphas = json::array({base.alpha});
    for (const json& a : algorithms)
      for (const json& alpha : alphas) out.push_back(config_from_json({{"algorithm", a}, {"alpha", alpha}}, base));
  }
  for (const json& r : runs) out.push_back(config_from_json(r, base));
  if (out.empty()) out.push_back(base);
  return out;
}

json to_json(const ExperimentResult& r, bool include_timing) {
  const AggregateRow& a = r.aggregate;
  json success = json::object();
  for (std::size_t i = 0; i < a.corridors.size(); ++i)
    success[std::string(to_string(a.corridors[i]))] = a.success_by_corridor[i];
  json agg = {{"algorithm", std::string(to_string(a.algorithm))},
              {"alpha", a.alpha},
              {"success", success},
              {"success_uncrossed", a.success_uncrossed},
              {"fail", a.fail},
              {"collisions", a.collisions},
              {"goal_misses", a.goal_misses},
              {"timeouts", a.timeouts},
              {"trials", a.trials}};
  json trials = json::array();
  for (const TrialSummary& t : r.trials) {
    json row = {{"trial", t.trial},
                {"seed", t.seed},
                {"outcome", std::string(to_string(t.outcome))},
                {"corridor", std::string(to_string(t.corridor))},
                {"terminal_cost", t.terminal_cost},
                {"cycles", t.cycles}};
    if (include_timing) row["wall_time_s"] = t.wall_time_s;
    trials.push_back(row);
  }
  return {{"config", to_json(r.config)}, {"geometry_hash", r.geometry_hash}, {"aggregate", agg}, {"trials", trials}};
}

json to_json(const SweepReport& r, bool include_timing) {
  json rows = json::array();
  for (const ExperimentResult& e : r.results) rows.push_back(to_json(e, include_timing));
  return {{"experiments", rows}};
}

std::string trials_csv(const ExperimentResult& r, bool include_timing) {
  std::ostringstream out;
  out << comment_header(to_json(r.config), r.geometry_hash);
  out << "trial,seed,outcome,corridor,terminal_cost,cycles" << (include_timing ? ",wall_time_s" : "") << "\n";
  for (const TrialSummary& t : r.trials) {
    out << t.trial << ',' << t.seed << ',' << to_string(t.outcome) << ',' << to_string(t.corridor) << ','
        << num(t.terminal_cost) << ',' << t.cycles;
    if (include_timing) out << ',' << num(t.wall_time_s);
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<Corridor> corridor_columns(const SweepReport& r) {
  std::set<int> seen;
  for (const auto& e : r.results)
    for (Corridor c : e.aggregate.corridors) seen.insert(static_cast<int>(c));
  std::vector<Corridor> cols;
  for (int c : seen) cols.push_back(static_cast<Corridor>(c));
  return cols;
}

Index count_for(const AggregateRow& a, Corridor c) {
  for (std::size_t i = 0; i < a.corridors.size(); ++i)
    if (a.corridors[i] == c) return a.success_by_corridor[i];
  return 0;
}

}  // namespace

std::string table_csv(const SweepReport& r) {
  const auto cols = corridor_columns(r);
  std::ostringstream out;
  json configs = json::array();
  for (const auto& e : r.results) configs.push_back(to_json(e.config));
  out << "# configs: " << configs.dump() << "\n";
  for (const auto& e : r.results) out << "# geometry_hash: " << e.geometry_hash << "\n";
  out << "scenario,algorithm,alpha";
  for (Corridor c : cols) out << ',' << to_string(c);
  out << ",uncrossed,fail,collisions,goal_misses,timeouts,trials\n";
  for (const auto& e : r.results) {
    const AggregateRow& a = e.aggregate;
    out << e.config.scenario << ',' << to_string(a.algorithm) << ',' << num(a.alpha);
    for (Corridor c : cols) out << ',' << count_for(a, c);
    out << ',' << a.success_uncrossed << ',' << a.fail << ',' << a.collisions << ',' << a.goal_misses << ','
        << a.timeouts << ',' << a.trials << "\n";
  }
  return out.str();
}

std::string format_table(const SweepReport& r) {
  const auto cols = corridor_columns(r);
  std::ostringstream out;
  out << std::left << std::setw(14) << "scenario" << std::setw(8) << "alg" << std::setw(7) << "alpha";
  for (Corridor c : cols) out << std::setw(15) << to_string(c);
  out << std::setw(11) << "uncrossed" << std::setw(6) << "fail" << "trials\n";
  for (const auto& e : r.results) {
    const AggregateRow& a = e.aggregate;
    out << std::setw(14) << e.config.scenario << std::setw(8) << to_string(a.algorithm) << std::setw(7)
        << num(a.alpha);
    for (Corridor c : cols) out << std::setw(15) << count_for(a, c);
    out << std::setw(11) << a.success_uncrossed << std::setw(6) << a.fail << a.trials << "\n";
  }
  return out.str();
}

json mission_to_json(const MissionResult& m, const json& config_echo) {
  json cycles = json::array();
  for (const ReplanCycleRecord& c : m.cycles) {
    json warnings = json::array();
    for (const auto& w : c.warnings) warnings.push_back(w);
    cycles.push_back({{"cycle", c.cycle_index},
                      {"start", {{"state", vec_json(c.start.state)}, {"time", c.start.time}}},
                      {"baseline_reached_goal", c.baseline_reached_goal},
                      {"tree_size", c.tree_size},
                      {"planner_iterations", c.planner_iterations},
                      {"bundle_size", c.bundle_size},
                      {"bundle_costs", costs_json(c.bundle_costs)},
                      {"bundle_weights", vec_json(c.bundle_weights)},
                      {"u_pi", vec_json(c.u_pi.values.row(0).transpose())},
                      {"executed_steps", c.executed.steps()},
                      {"warnings", warnings}});
  }
  const Index last = m.executed.size() - 1;
  return {{"config", config_echo},
          {"algorithm", std::string(to_string(m.algorithm))},
          {"outcome", std::string(to_string(m.outcome))},
          {"corridor", std::string(to_string(m.corridor))},
          {"terminal_cost", m.terminal_cost},
          {"executed_steps", m.executed.steps()},
          {"final_state", vec_json(m.executed.states.col(last))},
          {"final_time", m.executed.times(last)},
          {"cycles", cycles}};
}

std::string tree_vertices_csv(const TreeGraph& tree) {
  std::ostringstream out;
  out << "index,parent,x,y,theta,t\n";
  for (Index v = 0; v < tree.size(); ++v) {
    const auto& z = tree.vertex(v);
    out << v << ',' << tree.parent(v) << ',' << num(z.state(0)) << ',' << num(z.state(1)) << ','
        << num(z.state.size() > 2 ? z.state(2) : 0.0) << ',' << num(z.time) << "\n";
  }
  return out.str();
}

std::string tree_edges_csv(const TreeGraph& tree) {
  std::ostringstream out;
  out << "edge,parent,point,x,y,t\n";
  for (Index v = 1; v < tree.size(); ++v) {
    const Trajectory& e = tree.edge_trajectory(v);
    for (Index i = 0; i < e.size(); ++i)
      out << v << ',' << tree.parent(v) << ',' << i << ',' << num(e.states(0, i)) << ',' << num(e.states(1, i))
          << ',' << num(e.times(i)) << "\n";
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& t, const std::string& header_comment) {
  std::ostringstream out;
  out << header_comment;
  out << "t";
  for (Index r = 0; r < t.states.rows(); ++r) out << ",x" << r;
  for (Index r = 0; r < t.controls.channels(); ++r) out << ",u" << r << ",dw" << r;
  out << "\n";
  for (Index i = 0; i < t.size(); ++i) {
    out << num(t.times(i));
    for (Index r = 0; r < t.states.rows(); ++r) out << ',' << num(t.states(r, i));
    for (Index r = 0; r < t.controls.channels(); ++r) {
      if (i < t.steps())
        out << ',' << num(t.controls.values(r, i)) << ',' << num(t.noise.increments(r, i));
      else
        out << ",,";
    }
    out << "\n";
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::filesystem::path> write_report(const SweepReport& r, const std::filesystem::path& dir,
                                                bool include_timing) {
  std::vector<std::filesystem::path> written;
  const auto put = [&](const std::filesystem::path& p, const std::string& text) {
    write_text(p, text);
    written.push_back(p);
  };
  put(dir / "report.json", to_json(r, include_timing).dump(2) + "\n");
  put(dir / "table.csv", table_csv(r));
  for (std::size_t k = 0; k < r.results.size(); ++k) {
    const auto& e = r.results[k];
    std::ostringstream name;
    name << "trials_" << k << '_' << to_string(e.config.algorithm) << "_alpha" << num(e.config.alpha) << ".csv";
    put(dir / name.str(), trials_csv(e, include_timing));
  }
  return written;
}

}  // namespace pirrt
