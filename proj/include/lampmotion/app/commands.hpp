/**
 * @file commands.hpp
 * @brief Request handling shared by the command-line tool and the serve endpoint.
 *
 * Both front ends call run_plan, so a trajectory written by `lampmotion plan`
 * and one returned over HTTP for the same request are the same bytes.
 */
#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/io/digest.hpp"
#include "lampmotion/io/serialization.hpp"
#include "lampmotion/planner.hpp"
#include "lampmotion/scenarios.hpp"

namespace lampmotion::app {

using io::json;

inline constexpr const char* kConfigDirEnv = "LAMPMOTION_CONFIG_DIR";
inline constexpr const char* kChainFileName = "lamp_chain_v1.json";

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalidInput = 2,
  kExitUnreachable = 3,
  kExitInvariant = 4,
  kExitUnknownScenario = 5,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unreachable: return kExitUnreachable;
    case ErrorCode::InvariantViolation: return kExitInvariant;
    case ErrorCode::UnknownScenario: return kExitUnknownScenario;
    default: return kExitInvalidInput;
  }
}

/// Chain used when no --chain is given: the config directory's chain file if
/// present, else the built-in lamp.
inline ChainSpec load_chain(const std::string& path = {}) {
  if (!path.empty()) return io::chain_from_json(io::parse(io::read_file(path), path));
  if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) {
    const auto file = std::filesystem::path(dir) / kChainFileName;
    if (std::filesystem::exists(file)) return io::chain_from_json(io::parse(io::read_file(file.string()), file.string()));
  }
  return default_chain();
}

inline PlannerConfig load_planner_config(const std::string& path = {}) {
  if (path.empty()) return default_planner_config();
  return io::planner_config_from_json(io::parse(io::read_file(path), path));
}

/// Parameter override for one step of the authored plan.
struct StepOverride {
  std::size_t step = 0;
  ParamMap params;
};

struct PlanRequest {
  std::string scenario;
  Variant variant = Variant::E;
  BuildMode mode = BuildMode::Scripted;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::vector<StepOverride> overrides;

  void validate() const {
    if (scenario.empty()) fail(ErrorCode::InvalidInput, "scenario must be given");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail(ErrorCode::InvalidInput, "gamma must be a finite value >= 0");
    if (!overrides.empty() && (variant != Variant::E || mode != BuildMode::Scripted))
      fail(ErrorCode::InvalidInput, "parameter overrides apply to the scripted E plan only");
  }
};

inline PlanRequest plan_request_from_json(const json& j) {
  const std::string w = "plan request";
  io::expect_keys(j, {"scenario"}, {"variant", "mode", "gamma", "seed", "overrides"}, w);
  PlanRequest r;
  r.scenario = io::get_string(j, "scenario", w);
  if (j.contains("variant")) {
    const auto v = io::get_string(j, "variant", w);
    if (v == "F") r.variant = Variant::F;
    else if (v == "E") r.variant = Variant::E;
    else fail(ErrorCode::InvalidInput, w + ": variant must be 'F' or 'E'");
  }
  if (j.contains("mode")) r.mode = parse_build_mode(io::get_string(j, "mode", w));
  r.gamma = io::get_number_or(j, "gamma", r.gamma, w);
  if (j.contains("seed")) r.seed = io::get_unsigned(j, "seed", w);
  if (j.contains("overrides")) {
    if (!j["overrides"].is_array()) fail(ErrorCode::InvalidInput, w + ": overrides must be an array");
    for (const auto& o : j["overrides"]) {
      io::expect_keys(o, {"step", "params"}, {}, w + ".overrides");
      StepOverride so;
      so.step = io::get_unsigned(o, "step", w);
      const auto p = io::primitive_from_json(json{{"kind", "Nod"}, {"params", o["params"]}}, w + ".overrides");
      so.params = p.params;
      r.overrides.push_back(std::move(so));
    }
  }
  r.validate();
  return r;
}

struct PlanOutput {
  PlanRequest request;
  Trajectory trajectory;
  UtilityReport report;
  std::vector<PrimitiveInstance> plan;
  bool unreachable = false;
  std::string message;
  io::TrajectoryHeader header;
  std::string trajectory_text;
  std::string digest;
  std::size_t candidates = 0;
  double timing_ms = 0.0;
};

inline void apply_overrides(TaskSpec& task, const std::vector<StepOverride>& overrides) {
  for (const auto& o : overrides) {
    if (!task.scripted_plan || o.step >= task.scripted_plan->size())
      fail(ErrorCode::InvalidInput, "override step " + std::to_string(o.step) + " is outside the scripted plan");
    auto& p = (*task.scripted_plan)[o.step];
    for (const auto& [k, v] : o.params) p.params[k] = v;
    validate(p, task.world);
  }
}

/// Plans one variant of a built-in scenario. Unreachable goals are not an
/// error here: the attempt is returned with `unreachable` set.
inline PlanOutput run_plan(const ChainSpec& chain, const PlanRequest& request, PlannerConfig config) {
  request.validate();
  const auto t0 = std::chrono::steady_clock::now();
  config.gamma = request.gamma;
  config.seed = request.seed;

  TaskSpec task = load_scenario(request.scenario, Variant::E);
  apply_overrides(task, request.overrides);

  PlanOutput out;
  out.request = request;
  const FunctionalOutcome f = functional_outcome(chain, task, config);
  out.unreachable = f.unreachable;
  out.message = f.message;
  if (request.variant == Variant::F) {
    out.trajectory = f.trajectory;
    out.report = total_utility(chain, out.trajectory, task, config.gamma, *task.expression, config.scoring);
    out.candidates = 1;
  } else {
    PlanResult e = expressive_outcome(chain, task, f.trajectory, config, request.mode);
    out.trajectory = std::move(e.trajectory);
    out.report = e.report;
    out.plan = std::move(e.plan);
    out.candidates = e.candidates;
  }
  if (!is_valid(chain, out.trajectory))
    fail(ErrorCode::InvariantViolation, "planned trajectory violates joint limits or speed caps");

  const std::string mode = request.variant == Variant::F ? "none" : std::string(to_string(request.mode));
  out.header = {chain.id, request.scenario, std::string(to_string(request.variant)), mode, request.gamma, request.seed};
  out.trajectory_text = io::trajectory_text(out.trajectory, out.header);
  out.digest = io::content_digest(out.trajectory_text);
  out.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline json metrics_json(const PlanOutput& o) {
  json j = io::document(io::kMetricsFormat);
  j["scenario"] = o.request.scenario;
  j["variant"] = to_string(o.request.variant);
  j["mode"] = o.header.mode;
  j["gamma"] = o.request.gamma;
  j["seed"] = o.request.seed;
  j["chain_id"] = o.header.chain_id;
  j["status"] = o.unreachable ? "unreachable" : "ok";
  if (o.unreachable) j["message"] = o.message;
  j["report"] = io::to_json(o.report);
  j["plan"] = io::to_json(o.plan);
  j["candidates"] = o.candidates;
  j["duration_s"] = o.trajectory.duration();
  j["samples"] = o.trajectory.samples.size();
  j["trajectory_digest"] = o.digest;
  j["timing_ms"] = o.timing_ms;
  return j;
}

/// Per-sample head pose and joint origins for rendering.
inline json poses_json(const ChainSpec& chain, const Trajectory& traj) {
  json poses = json::array();
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const ChainFrames f = chain_frames(chain, traj.samples[i].q);
    json origins = json::array();
    for (const auto& o : f.joint_origins) origins.push_back(io::to_array(o));
    poses.push_back({{"t", traj.time(i)},
                     {"head", io::to_array(f.head.position)},
                     {"facing", io::to_array(f.head.facing)},
                     {"joint_origins", origins},
                     {"light_on", traj.samples[i].tool.light_on},
                     {"light_intensity", traj.samples[i].tool.light_intensity},
                     {"projector_on", traj.samples[i].tool.projector_on}});
  }
  return poses;
}

inline std::string file_stem(const PlanRequest& r) {
  std::string stem = r.scenario + "_" + std::string(to_string(r.variant));
  if (r.variant == Variant::E) stem += "_" + std::string(to_string(r.mode));
  return stem;
}

struct WrittenFiles {
  std::filesystem::path trajectory;
  std::filesystem::path metrics;
};

inline WrittenFiles write_plan_files(const PlanOutput& o, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::InvalidInput, "cannot create output directory '" + dir.string() + "'");
  WrittenFiles w{dir / (file_stem(o.request) + ".trajectory.json"), dir / (file_stem(o.request) + ".metrics.json")};
  io::write_file(w.trajectory.string(), o.trajectory_text);
  io::write_file(w.metrics.string(), io::dump(metrics_json(o)));
  return w;
}

inline json pair_json(const ScenarioPair& p, double gamma, std::uint64_t seed) {
  json j = io::document("lampmotion.comparison");
  j["scenario"] = p.scenario;
  j["mode"] = to_string(p.mode);
  j["gamma"] = gamma;
  j["seed"] = seed;
  j["status"] = p.unreachable ? "unreachable" : "ok";
  j["F"] = {{"report", io::to_json(p.report_F)}, {"duration_s", p.traj_F.duration()}};
  j["E"] = {{"report", io::to_json(p.report_E)}, {"duration_s", p.traj_E.duration()}, {"plan", io::to_json(p.plan_E)}};
  j["checks"] = json::object();
  for (const auto& c : p.checks) j["checks"][c.name] = c.ok;
  j["ok"] = p.ok();
  return j;
}

struct SweepTable {
  std::string scenario;
  std::vector<SweepRow> rows;
  bool monotone = true;  ///< E non-decreasing in gamma
};

inline SweepTable run_sweep(const ChainSpec& chain, const std::string& scenario, std::vector<double> gammas,
                            PlannerConfig config) {
  if (gammas.empty()) fail(ErrorCode::InvalidInput, "sweep needs at least one gamma");
  std::sort(gammas.begin(), gammas.end());
  const TaskSpec task = load_scenario(scenario, Variant::E);
  const FunctionalOutcome f = functional_outcome(chain, task, config);
  SweepTable t;
  t.scenario = scenario;
  t.rows = sweep(chain, task, f.trajectory, config, *task.expression, gammas);
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.rows[i].result.report.E < t.rows[i - 1].result.report.E) t.monotone = false;
  return t;
}

inline json sweep_json(const SweepTable& t, const PlannerConfig& config) {
  json j = io::document("lampmotion.sweep");
  j["scenario"] = t.scenario;
  j["seed"] = config.seed;
  j["exhaustive"] = config.exhaustive;
  j["rows"] = json::array();
  for (const auto& r : t.rows)
    j["rows"].push_back({{"gamma", r.gamma},
                         {"F", r.result.report.F},
                         {"E", r.result.report.E},
                         {"total", r.result.report.total},
                         {"plan", io::to_json(r.result.plan)}});
  j["E_non_decreasing"] = t.monotone;
  return j;
}

inline json scenarios_json() {
  json j = io::document("lampmotion.scenarios");
  j["scenarios"] = json::array();
  for (const auto& name : scenario_names()) {
    const TaskSpec t = load_scenario(name, Variant::E);
    j["scenarios"].push_back({{"id", t.id},
                              {"orientation", to_string(t.orientation)},
                              {"agency", to_string(t.agency)},
                              {"comment", t.comment},
                              {"variants", {"F", "E"}},
                              {"modes", {"scripted", "searched"}},
                              {"scripted_plan", io::to_json(*t.scripted_plan)}});
  }
  return j;
}

inline json error_json(ErrorCode code, const std::string& message) {
  return json{{"error", {{"code", to_string(code)}, {"message", message}}}};
}

}  // namespace lampmotion::app
