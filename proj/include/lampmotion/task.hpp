/**
 * @file task.hpp
 * @brief Task and expression descriptions: goal state, world context and the
 * expressive parameterization used by the utility scorer.
 */
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/kinematics.hpp"
#include "lampmotion/primitives.hpp"
#include "lampmotion/trajectory.hpp"

namespace lampmotion {

struct CategoryWeights {
  double intention = 0.0;
  double attention = 0.0;
  double attitude = 0.0;
  double emotion = 0.0;

  bool operator==(const CategoryWeights&) const = default;
};

/// Target temporal character, each entry normalized to [0, 1].
struct AttitudeProfile {
  double pause_fraction = 0.0;
  double jerk_level = 0.0;
  double speed_level = 0.0;

  bool operator==(const AttitudeProfile&) const = default;
};

struct EmotionProfile {
  double amplitude = 0.0;
  double tempo = 0.0;

  bool operator==(const EmotionProfile&) const = default;
};

struct ExpressionSpec {
  CategoryWeights weights;
  std::optional<std::string> attention_target;
  std::optional<std::string> intention_target;  ///< falls back to the task's goal target
  double intention_window = 0.5;                ///< s
  AttitudeProfile attitude_profile;
  EmotionProfile emotion_profile;

  bool operator==(const ExpressionSpec&) const = default;

  void validate() const {
    const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (weights.intention < 0 || weights.attention < 0 || weights.attitude < 0 || weights.emotion < 0)
      fail(ErrorCode::InvalidInput, "expression weights must be non-negative");
    if (!(intention_window > 0.0)) fail(ErrorCode::InvalidInput, "intention window must be positive");
    if (!unit(attitude_profile.pause_fraction) || !unit(attitude_profile.jerk_level) ||
        !unit(attitude_profile.speed_level) || !unit(emotion_profile.amplitude) || !unit(emotion_profile.tempo))
      fail(ErrorCode::InvalidInput, "expression profile entries must lie in [0, 1]");
  }
};

enum class Variant { F, E };
enum class Orientation { Function, Social };
enum class Agency { Proactive, Reactive };

/// Task-space goal: a head position, optionally facing a named target or a direction.
struct TaskPoseGoal {
  Vec3 position = Vec3::Zero();
  std::optional<std::string> look_at;
  std::optional<Vec3> facing;

  bool operator==(const TaskPoseGoal&) const = default;
};

using TaskGoal = std::variant<JointVector, TaskPoseGoal>;

/// Timestamped speech marker. Only gates movement timing; no speech is produced.
struct Utterance {
  double time = 0.0;
  std::string label;

  bool operator==(const Utterance&) const = default;
};

struct TaskSpec {
  std::string id;
  Variant variant = Variant::F;
  Orientation orientation = Orientation::Function;
  Agency agency = Agency::Reactive;
  std::string comment;

  JointVector start = JointVector::Zero();
  ToolState start_tool;
  TaskGoal goal = JointVector::Zero().eval();
  ToolState goal_tool;
  std::optional<std::string> goal_target;
  double epsilon = 1e-3;  ///< rad
  double horizon = 20.0;  ///< s
  WorldState world;

  std::optional<ExpressionSpec> expression;
  std::optional<std::vector<PrimitiveInstance>> scripted_plan;
  std::vector<Utterance> utterances;

  void validate() const {
    if (id.empty()) fail(ErrorCode::InvalidInput, "task id must not be empty");
    if (!(epsilon > 0.0)) fail(ErrorCode::InvalidInput, "goal tolerance must be positive");
    if (!(horizon > 0.0)) fail(ErrorCode::InvalidInput, "horizon must be positive");
    if (!start.allFinite()) fail(ErrorCode::InvalidInput, "start configuration must be finite");
    start_tool.validate();
    goal_tool.validate();
    world.validate();
    if (const auto* pg = std::get_if<TaskPoseGoal>(&goal)) {
      if (!pg->position.allFinite()) fail(ErrorCode::InvalidInput, "goal position must be finite");
      if (pg->look_at && pg->facing) fail(ErrorCode::InvalidInput, "goal may name look_at or facing, not both");
      if (pg->look_at) world.target(*pg->look_at);
    } else if (!std::get<JointVector>(goal).allFinite()) {
      fail(ErrorCode::InvalidInput, "goal configuration must be finite");
    }
    if (goal_target) world.target(*goal_target);
    if (variant == Variant::F && (expression || scripted_plan))
      fail(ErrorCode::InvalidInput, "F variants carry neither an expression spec nor a scripted plan");
    if (variant == Variant::E && !expression && !scripted_plan)
      fail(ErrorCode::InvalidInput, "E variants need an expression spec or a scripted plan");
    if (expression) {
      expression->validate();
      if (expression->attention_target) world.target(*expression->attention_target);
      if (expression->intention_target) world.target(*expression->intention_target);
    }
    if (scripted_plan)
      for (const auto& p : *scripted_plan) lampmotion::validate(p, world);
  }
};

/// The goal state s_g in joint space. `q` is empty when the goal cannot be reached,
/// in which case `best_effort` holds the closest configuration found.
struct ResolvedGoal {
  std::optional<JointVector> q;
  std::optional<JointVector> best_effort;
  ToolState tool;
  double epsilon = 1e-3;
};

inline PoseGoal to_pose_goal(const TaskPoseGoal& g, const WorldState& world) {
  PoseGoal out{g.position, std::nullopt};
  if (g.look_at) out.facing = (world.target(*g.look_at) - g.position).normalized();
  if (g.facing) out.facing = g.facing->normalized();
  return out;
}

inline ResolvedGoal resolve_goal(const ChainSpec& chain, const TaskSpec& task) {
  ResolvedGoal r;
  r.tool = task.goal_tool;
  r.epsilon = task.epsilon;
  if (const auto* q = std::get_if<JointVector>(&task.goal)) {
    if (!within_limits(chain, *q)) fail(ErrorCode::InvalidInput, "goal configuration violates joint limits");
    r.q = *q;
    return r;
  }
  const PoseGoal goal = to_pose_goal(std::get<TaskPoseGoal>(task.goal), task.world);
  try {
    r.q = inverse_kinematics(chain, goal, clamp_to_limits(chain, task.start));
  } catch (const UnreachableError& e) {
    r.best_effort = e.best_effort();
  }
  return r;
}

/// Spatial point the task's goal is about, used by the intention term.
inline Vec3 goal_point(const ChainSpec& chain, const TaskSpec& task) {
  if (task.goal_target) return task.world.target(*task.goal_target);
  if (const auto* pg = std::get_if<TaskPoseGoal>(&task.goal)) {
    if (pg->look_at) return task.world.target(*pg->look_at);
    return pg->position;
  }
  return forward_kinematics(chain, std::get<JointVector>(task.goal)).position;
}

inline std::string_view to_string(Variant v) { return v == Variant::F ? "F" : "E"; }
inline std::string_view to_string(Orientation o) { return o == Orientation::Function ? "function" : "social"; }
inline std::string_view to_string(Agency a) { return a == Agency::Proactive ? "proactive" : "reactive"; }

}  // namespace lampmotion
