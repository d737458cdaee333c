/**
 * @file scenarios.hpp
 * @brief The six built-in interaction scenarios and the F/E pair builder.
 *
 * Each scenario is stored as its E-variant task document. The F variant is the
 * same task with the expression spec and the authored plan removed.
 *
 * Desk frame: origin at the lamp base, z up, x toward the desk front, metres.
 */
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/io/serialization.hpp"
#include "lampmotion/planner.hpp"
#include "lampmotion/primitives.hpp"
#include "lampmotion/task.hpp"
#include "lampmotion/utility.hpp"

namespace lampmotion {

namespace detail {

inline constexpr std::string_view kPhotographLight = R"json({
  "format": "lampmotion.task", "version": "1.0",
  "id": "photograph_light", "variant": "E",
  "orientation": "function", "agency": "reactive",
  "comment": "User points at the subject; the lamp moves over it and lights it for a photo.",
  "start": [0, -0.1, 0.2, 0, 0.5, 0],
  "start_tool": {"light_on": true, "light_intensity": 0.5, "projector_on": false},
  "goal": {"position": [0.36, -0.06, 0.30], "look_at": "subject"},
  "goal_tool": {"light_on": true, "light_intensity": 0.85, "projector_on": false},
  "goal_target": "subject",
  "epsilon": 0.001, "horizon": 20,
  "world": {
    "user_position": [0.6, 0.45, 0.40],
    "user_attention_point": [0.40, -0.10, 0.0],
    "objects": {"subject": [0.40, -0.10, 0.0]}
  },
  "expression": {
    "weights": {"intention": 1.0, "attention": 1.0, "attitude": 0.5, "emotion": 0.5},
    "attention_target": "user",
    "intention_window": 0.5,
    "attitude_profile": {"pause_fraction": 0.25, "jerk_level": 0.2, "speed_level": 0.4},
    "emotion_profile": {"amplitude": 0.4, "tempo": 0.2}
  },
  "scripted_plan": [
    {"kind": "OrientToward", "params": {"target": "user", "duration": 1.2}, "anchor": "pre"},
    {"kind": "OrientToward", "params": {"target": "subject", "duration": 1.0}, "anchor": "pre"},
    {"kind": "Lean", "params": {"amplitude": 0.15, "duration": 1.2}, "anchor": "post"}
  ]
})json";

inline constexpr std::string_view kProjectAssistance = R"json({
  "format": "lampmotion.task", "version": "1.0",
  "id": "project_assistance", "variant": "E",
  "orientation": "function", "agency": "proactive",
  "comment": "The lamp notices the user's task and projects a guide video onto the workpiece.",
  "start": [0, -0.1, 0.2, 0, 0.5, 0],
  "start_tool": {"light_on": true, "light_intensity": 0.5, "projector_on": false},
  "goal": {"position": [0.26, 0.10, 0.34], "look_at": "workpiece"},
  "goal_tool": {"light_on": false, "light_intensity": 0.0, "projector_on": true, "projected_content": "tutorial_video"},
  "goal_target": "workpiece",
  "epsilon": 0.001, "horizon": 20,
  "world": {
    "user_position": [0.6, 0.45, 0.40],
    "user_attention_point": [0.35, 0.15, 0.0],
    "objects": {"workpiece": [0.35, 0.15, 0.0], "desk_spot": [0.45, -0.20, 0.0]}
  },
  "expression": {
    "weights": {"intention": 1.0, "attention": 1.0, "attitude": 0.5, "emotion": 0.5},
    "attention_target": "user_attention",
    "intention_window": 0.5,
    "attitude_profile": {"pause_fraction": 0.3, "jerk_level": 0.2, "speed_level": 0.4},
    "emotion_profile": {"amplitude": 0.4, "tempo": 0.2}
  },
  "scripted_plan": [
    {"kind": "AttentionShift", "params": {"target": "user", "target2": "user_attention", "duration": 2.0}, "anchor": "pre"},
    {"kind": "Lean", "params": {"amplitude": 0.12, "duration": 1.2}, "anchor": "post"}
  ]
})json";

inline constexpr std::string_view kFailureIndication = R"json({
  "format": "lampmotion.task", "version": "1.0",
  "id": "failure_indication", "variant": "E",
  "orientation": "function", "agency": "reactive",
  "comment": "User asks the lamp to light a note beyond its reach; the lamp stops at its limit and reports the error.",
  "start": [0, -0.1, 0.2, 0, 0.5, 0],
  "start_tool": {"light_on": true, "light_intensity": 0.5, "projector_on": false},
  "goal": {"position": [1.0, 0.35, 0.25]},
  "goal_tool": {"light_on": true, "light_intensity": 0.65, "projector_on": false},
  "goal_target": "note",
  "epsilon": 0.001, "horizon": 20,
  "world": {
    "user_position": [0.6, 0.45, 0.40],
    "objects": {"note": [1.0, 0.35, 0.25]}
  },
  "expression": {
    "weights": {"intention": 1.0, "attention": 1.0, "attitude": 0.5, "emotion": 0.5},
    "attention_target": "user",
    "intention_window": 0.5,
    "attitude_profile": {"pause_fraction": 0.4, "jerk_level": 0.2, "speed_level": 0.3},
    "emotion_profile": {"amplitude": 0.5, "tempo": 0.3}
  },
  "scripted_plan": [
    {"kind": "PauseInsert", "params": {"duration": 0.8}, "anchor": "pre"},
    {"kind": "Stretch", "params": {"amplitude": 0.15, "duration": 1.2, "cycles": 2}, "anchor": "post"},
    {"kind": "OrientToward", "params": {"target": "user", "duration": 1.2}, "anchor": "terminal-"},
    {"kind": "Shake", "params": {"amplitude": 0.25, "duration": 1.0}, "anchor": "terminal-"}
  ]
})json";

inline constexpr std::string_view kRemindWater = R"json({
  "format": "lampmotion.task", "version": "1.0",
  "id": "remind_water", "variant": "E",
  "orientation": "social", "agency": "proactive",
  "comment": "The lamp interrupts to remind the user to drink. Labelled social/proactive after the study's social-task grouping; the scenario also has function-oriented traits (an informational reminder).",
  "start": [0, -0.1, 0.2, 0, 0.5, 0],
  "start_tool": {"light_on": true, "light_intensity": 0.5, "projector_on": false},
  "goal": {"position": [0.30, 0.22, 0.20], "look_at": "cup"},
  "goal_tool": {"light_on": true, "light_intensity": 0.9, "projector_on": false},
  "goal_target": "cup",
  "epsilon": 0.001, "horizon": 20,
  "world": {
    "user_position": [0.6, 0.45, 0.40],
    "objects": {"cup": [0.35, 0.30, 0.0]}
  },
  "expression": {
    "weights": {"intention": 1.0, "attention": 1.0, "attitude": 0.5, "emotion": 0.5},
    "attention_target": "user",
    "intention_window": 0.5,
    "attitude_profile": {"pause_fraction": 0.3, "jerk_level": 0.2, "speed_level": 0.4},
    "emotion_profile": {"amplitude": 0.5, "tempo": 0.3}
  },
  "scripted_plan": [
    {"kind": "Approach", "params": {"target": "cup", "duration": 1.6}, "anchor": "post"},
    {"kind": "OrientToward", "params": {"target": "user", "duration": 1.4}, "anchor": "terminal-"}
  ],
  "utterances": [{"time": 0.0, "label": "reminder"}]
})json";

inline constexpr std::string_view kSocialConversation = R"json({
  "format": "lampmotion.task", "version": "1.0",
  "id": "social_conversation", "variant": "E",
  "orientation": "social", "agency": "reactive",
  "comment": "The lamp chats with the user about their day; speech is represented by timed utterance markers only.",
  "start": [0, -0.1, 0.2, 0, 0.5, 0],
  "start_tool": {"light_on": true, "light_intensity": 0.5, "projector_on": false},
  "goal": {"joints": [0, -0.1, 0.2, 0, 0.5, 0]},
  "goal_tool": {"light_on": true, "light_intensity": 0.6, "projector_on": false},
  "epsilon": 0.001, "horizon": 20,
  "world": {
    "user_position": [0.6, 0.45, 0.40],
    "objects": {"book": [0.30, -0.25, 0.0]}
  },
  "expression": {
    "weights": {"intention": 0.0, "attention": 1.0, "attitude": 0.5, "emotion": 1.0},
    "attention_target": "user",
    "intention_window": 0.5,
    "attitude_profile": {"pause_fraction": 0.3, "jerk_level": 0.3, "speed_level": 0.4},
    "emotion_profile": {"amplitude": 0.6, "tempo": 0.4}
  },
  "scripted_plan": [
    {"kind": "OrientToward", "params": {"target": "user", "duration": 1.5}, "anchor": "terminal-"},
    {"kind": "OrientToward", "params": {"target": "book", "duration": 1.2}, "anchor": "terminal-"},
    {"kind": "Wag", "params": {"amplitude": 0.3, "duration": 1.5, "cycles": 3}, "anchor": "terminal-"},
    {"kind": "LowerHead", "params": {"amplitude": 0.35, "duration": 1.5}, "anchor": "terminal-"},
    {"kind": "OrientToward", "params": {"target": "user", "duration": 1.2}, "anchor": "terminal-"}
  ],
  "utterances": [
    {"time": 0.0, "label": "greeting"},
    {"time": 1.5, "label": "mention_book"},
    {"time": 2.7, "label": "excited"},
    {"time": 4.2, "label": "sad"},
    {"time": 5.7, "label": "closing"}
  ]
})json";

inline constexpr std::string_view kPlayMusic = R"json({
  "format": "lampmotion.task", "version": "1.0",
  "id": "play_music", "variant": "E",
  "orientation": "social", "agency": "proactive",
  "comment": "The lamp plays music for the user; beats at 120 bpm.",
  "start": [0, -0.1, 0.2, 0, 0.5, 0],
  "start_tool": {"light_on": true, "light_intensity": 0.5, "projector_on": false},
  "goal": {"joints": [0, -0.1, 0.2, 0, 0.5, 0]},
  "goal_tool": {"light_on": true, "light_intensity": 0.7, "projector_on": false},
  "epsilon": 0.001, "horizon": 20,
  "world": {
    "user_position": [0.6, 0.45, 0.40],
    "beat_times": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]
  },
  "expression": {
    "weights": {"intention": 0.0, "attention": 0.5, "attitude": 0.5, "emotion": 1.0},
    "attention_target": "user",
    "intention_window": 0.5,
    "attitude_profile": {"pause_fraction": 0.0, "jerk_level": 0.4, "speed_level": 0.6},
    "emotion_profile": {"amplitude": 0.7, "tempo": 0.5}
  },
  "scripted_plan": [
    {"kind": "Wag", "params": {"amplitude": 0.35, "beat_sync": 1}, "anchor": "terminal-"}
  ]
})json";

struct BuiltinScenario {
  std::string_view name;
  std::string_view document;
};

inline constexpr std::array<BuiltinScenario, 6> kBuiltins{{
    {"photograph_light", kPhotographLight},
    {"project_assistance", kProjectAssistance},
    {"failure_indication", kFailureIndication},
    {"remind_water", kRemindWater},
    {"social_conversation", kSocialConversation},
    {"play_music", kPlayMusic},
}};

}  // namespace detail

inline std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& b : detail::kBuiltins) out.emplace_back(b.name);
  return out;
}

inline TaskSpec load_scenario(std::string_view name, Variant variant) {
  for (const auto& b : detail::kBuiltins) {
    if (b.name != name) continue;
    TaskSpec t = io::task_from_text(b.document);
    if (variant == Variant::F) {
      t.variant = Variant::F;
      t.expression.reset();
      t.scripted_plan.reset();
    }
    return t;
  }
  fail(ErrorCode::UnknownScenario, "unknown scenario '" + std::string(name) + "'");
}

enum class BuildMode { Scripted, Searched };

inline std::string_view to_string(BuildMode m) { return m == BuildMode::Scripted ? "scripted" : "searched"; }

inline BuildMode parse_build_mode(std::string_view s) {
  if (s == "scripted") return BuildMode::Scripted;
  if (s == "searched") return BuildMode::Searched;
  fail(ErrorCode::InvalidInput, "mode must be 'scripted' or 'searched'");
}

struct InvariantCheck {
  std::string name;
  bool ok = false;
};

/// Function-driven trajectory of a task; for unreachable goals the attempt
/// that ends at the limit pose, flagged through `unreachable`.
struct FunctionalOutcome {
  Trajectory trajectory;
  bool unreachable = false;
  std::string message;
};

inline FunctionalOutcome functional_outcome(const ChainSpec& chain, const TaskSpec& task, const PlannerConfig& config) {
  try {
    return {plan_functional(chain, task, config), false, {}};
  } catch (const TaskUnreachableError& e) {
    return {e.attempt(), true, e.what()};
  }
}

/// Expression-driven trajectory of an E-variant task on top of `base`.
inline PlanResult expressive_outcome(const ChainSpec& chain, const TaskSpec& task, const Trajectory& base,
                                     const PlannerConfig& config, BuildMode mode) {
  if (!task.expression) fail(ErrorCode::InvalidInput, "task '" + task.id + "' has no expression spec");
  if (mode == BuildMode::Searched) return search_expressive(chain, task, base, config, *task.expression);
  if (!task.scripted_plan) fail(ErrorCode::InvalidInput, "task '" + task.id + "' has no scripted plan");
  PlanResult r;
  r.plan = *task.scripted_plan;
  r.trajectory = compose(chain, base, r.plan, task.world, config.primitives);
  r.report = total_utility(chain, r.trajectory, task, config.gamma, *task.expression, config.scoring);
  r.candidates = 1;
  return r;
}

struct ScenarioPair {
  std::string scenario;
  BuildMode mode = BuildMode::Scripted;
  bool unreachable = false;
  Trajectory traj_F;
  Trajectory traj_E;
  UtilityReport report_F;
  UtilityReport report_E;
  std::vector<PrimitiveInstance> plan_E;
  std::vector<InvariantCheck> checks;

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.ok; });
  }
};

/// Plans both variants with the same chain and configuration and checks the
/// pair invariants. Both trajectories are scored with the E variant's spec.
inline ScenarioPair build_pair(const ChainSpec& chain, std::string_view name, const PlannerConfig& config,
                               BuildMode mode = BuildMode::Scripted) {
  config.validate();
  const TaskSpec task_F = load_scenario(name, Variant::F);
  const TaskSpec task_E = load_scenario(name, Variant::E);
  ScenarioPair p;
  p.scenario = std::string(name);
  p.mode = mode;

  const FunctionalOutcome f = functional_outcome(chain, task_F, config);
  p.unreachable = f.unreachable;
  p.traj_F = f.trajectory;
  const ExpressionSpec& spec = *task_E.expression;
  p.report_F = total_utility(chain, p.traj_F, task_E, config.gamma, spec, config.scoring);

  PlanResult e = expressive_outcome(chain, task_E, f.trajectory, config, mode);
  p.traj_E = std::move(e.trajectory);
  p.report_E = e.report;
  p.plan_E = std::move(e.plan);

  p.checks.push_back({"terminal_equal", p.traj_E.terminal() == p.traj_F.terminal()});
  p.checks.push_back({"functional_equal", p.report_E.F == p.report_F.F});
  p.checks.push_back({"expressive_gain", p.report_E.E > p.report_F.E});
  p.checks.push_back({"limits_respected", is_valid(chain, p.traj_F) && is_valid(chain, p.traj_E)});
  return p;
}

inline void require_invariants(const ScenarioPair& p) {
  for (const auto& c : p.checks)
    if (!c.ok) fail(ErrorCode::InvariantViolation, p.scenario + ": invariant '" + c.name + "' failed");
}

}  // namespace lampmotion
