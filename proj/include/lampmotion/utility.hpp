/**
 * @file utility.hpp
 * @brief Functional utility F, expressive utility E and the scalarized total F + gamma * E.
 *
 * F counts the samples that sit at the goal state (within an epsilon ball on
 * the joints, exact on the tool state). E is a weighted sum of four category
 * terms:
 *   - attention: time integral of the per-sample gaze score toward a target
 *   - intention: mean gaze toward the goal during the last pause before the
 *     functional motion starts
 *   - attitude:  closeness of {pause fraction, jerk, speed} to a target profile
 *   - emotion:   closeness of {amplitude, tempo} to a target profile
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/kinematics.hpp"
#include "lampmotion/task.hpp"
#include "lampmotion/trajectory.hpp"

namespace lampmotion {

/// Normalization constants that map raw kinematic features to [0, 1].
struct ScoringConfig {
  FeatureSettings features;
  double speed_norm = 0.3;         ///< m/s of mean moving head speed that maps to 1
  double jerk_norm = 40.0;         ///< m/s^3 of mean |d2(speed)/dt2| that maps to 1
  double amplitude_norm = 0.04;    ///< m of RMS detrended head excursion that maps to 1
  double tempo_norm = 4.0;         ///< head speed peaks per second that map to 1
  double detrend_window = 1.0;     ///< s, moving-average window used to detrend head position
};

struct ObservedProfile {
  double pause_fraction = 0.0;
  double jerk_level = 0.0;
  double speed_level = 0.0;
  double amplitude = 0.0;
  double tempo = 0.0;
};

inline const std::array<std::string, 4>& category_names() {
  static const std::array<std::string, 4> names{"intention", "attention", "attitude", "emotion"};
  return names;
}

struct UtilityReport {
  double F = 0.0;
  double E = 0.0;
  std::map<std::string, double> per_category;     ///< weighted contribution of each category; sums to E
  std::map<std::string, double> category_scores;  ///< unweighted scores in [0, 1] (attention as a time mean)
  double gamma = 0.0;
  double total = 0.0;
};

/// Distance to the goal: max joint error, or infinity on any tool mismatch.
inline double goal_distance(const Sample& s, const JointVector& goal_q, const ToolState& goal_tool) {
  if (!(s.tool == goal_tool)) return std::numeric_limits<double>::infinity();
  return (s.q - goal_q).cwiseAbs().maxCoeff();
}

inline double functional_utility(const Trajectory& traj, const ResolvedGoal& goal) {
  if (!goal.q) return 0.0;
  double count = 0.0;
  for (const auto& s : traj.samples)
    if (goal_distance(s, *goal.q, goal.tool) <= goal.epsilon) count += 1.0;
  return count;
}

inline double functional_utility(const ChainSpec& chain, const Trajectory& traj, const TaskSpec& task) {
  return functional_utility(traj, resolve_goal(chain, task));
}

/// (1 + cos(theta)) / 2 for the angle between head facing and the head-to-target direction.
inline double attention_score(const Pose& head, const Vec3& target) {
  const Vec3 dir = target - head.position;
  const double n = dir.norm();
  if (n < 1e-12) return 0.5;
  const double c = std::clamp(head.facing.dot(dir / n), -1.0, 1.0);
  return 0.5 * (1.0 + c);
}

inline double attention_score(const ChainSpec& chain, const State& state, const Vec3& target) {
  return attention_score(forward_kinematics(chain, state.q), target);
}

namespace detail {

/// First interval index at which the head moves outside any primitive span, or
/// the last sample index if the functional motion never starts.
inline std::size_t functional_onset(const Trajectory& traj, const FeatureSeries& f, double pause_speed) {
  for (std::size_t i = 0; i < f.interval_speed.size(); ++i) {
    if (f.interval_speed[i] < pause_speed) continue;
    bool expressive = false;
    for (const auto& a : traj.annotations) {
      if (i >= a.first && i + 1 <= a.last) {
        expressive = true;
        break;
      }
    }
    if (!expressive) return i;
  }
  return traj.samples.empty() ? 0 : traj.samples.size() - 1;
}

}  // namespace detail

/// Mean gaze toward `target` over the final `window` seconds of the last pause
/// that ends before the functional motion begins; 0 if no such pause exists.
inline double intention_score(const Trajectory& traj, const FeatureSeries& f, const Vec3& target, double window,
                              double pause_speed) {
  if (traj.samples.size() < 2) return 0.0;
  const std::size_t onset = detail::functional_onset(traj, f, pause_speed);
  const double t_onset = traj.time(onset);
  const Pause* last = nullptr;
  for (const auto& p : f.pauses)
    if (p.start + p.duration <= t_onset + 1e-9) last = &p;
  if (!last) return 0.0;
  const double end = last->start + last->duration;
  const double begin = end - std::min(window, last->duration);
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double t = traj.time(i);
    if (t < begin - 1e-9 || t > end + 1e-9) continue;
    sum += attention_score(f.head[i], target);
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

inline double intention_score(const ChainSpec& chain, const Trajectory& traj, const TaskSpec& task,
                              const ScoringConfig& cfg = {}) {
  const double window = task.expression ? task.expression->intention_window : ExpressionSpec{}.intention_window;
  const Vec3 target = task.expression && task.expression->intention_target
                          ? task.world.target(*task.expression->intention_target)
                          : goal_point(chain, task);
  const auto f = kinematic_features(chain, traj, cfg.features);
  return intention_score(traj, f, target, window, cfg.features.pause_speed);
}

inline ObservedProfile observe_profile(const FeatureSeries& f, const ScoringConfig& cfg = {}) {
  ObservedProfile o;
  const std::size_t n = f.head.size();
  const double duration = f.duration();
  if (n < 2 || duration <= 0.0) return o;

  double paused = 0.0;
  for (const auto& p : f.pauses) paused += p.duration;
  o.pause_fraction = std::clamp(paused / duration, 0.0, 1.0);

  double moving_sum = 0.0;
  int moving = 0;
  for (double v : f.interval_speed) {
    if (v >= cfg.features.pause_speed) {
      moving_sum += v;
      ++moving;
    }
  }
  o.speed_level = moving == 0 ? 0.0 : std::clamp(moving_sum / moving / cfg.speed_norm, 0.0, 1.0);

  double jerk_sum = 0.0;
  for (double j : f.jerk) jerk_sum += std::abs(j);
  o.jerk_level = std::clamp(jerk_sum / static_cast<double>(n) / cfg.jerk_norm, 0.0, 1.0);

  // Excursion of the head about its moving average.
  const auto half = static_cast<std::ptrdiff_t>(std::llround(0.5 * cfg.detrend_window / f.dt));
  std::vector<Vec3> prefix(n + 1, Vec3::Zero());
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + f.head[i].position;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half));
    const auto hi = std::min(n - 1, i + static_cast<std::size_t>(half));
    const Vec3 mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    sq += (f.head[i].position - mean).squaredNorm();
  }
  o.amplitude = std::clamp(std::sqrt(sq / static_cast<double>(n)) / cfg.amplitude_norm, 0.0, 1.0);

  int peaks = 0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (f.speed[i] > cfg.features.pause_speed && f.speed[i] > f.speed[i - 1] && f.speed[i] >= f.speed[i + 1]) ++peaks;
  o.tempo = std::clamp(static_cast<double>(peaks) / duration / cfg.tempo_norm, 0.0, 1.0);
  return o;
}

struct AttitudeEmotion {
  double attitude = 0.0;
  double emotion = 0.0;
};

inline AttitudeEmotion attitude_emotion_score(const ObservedProfile& o, const ExpressionSpec& spec) {
  const auto& a = spec.attitude_profile;
  const auto& e = spec.emotion_profile;
  AttitudeEmotion out;
  out.attitude = 1.0 - (std::abs(o.pause_fraction - a.pause_fraction) + std::abs(o.jerk_level - a.jerk_level) +
                        std::abs(o.speed_level - a.speed_level)) /
                           3.0;
  out.emotion = 1.0 - (std::abs(o.amplitude - e.amplitude) + std::abs(o.tempo - e.tempo)) / 2.0;
  return out;
}

inline AttitudeEmotion attitude_emotion_score(const FeatureSeries& f, const ExpressionSpec& spec,
                                              const ScoringConfig& cfg = {}) {
  return attitude_emotion_score(observe_profile(f, cfg), spec);
}

struct ExpressiveResult {
  double E = 0.0;
  std::map<std::string, double> per_category;
  std::map<std::string, double> category_scores;
};

/// E for a trajectory. `intention_point` is the goal-related target used when
/// the spec does not name an intention target explicitly.
inline ExpressiveResult expressive_utility(const ChainSpec& chain, const Trajectory& traj, const WorldState& world,
                                           const ExpressionSpec& spec, const std::optional<Vec3>& intention_point,
                                           const ScoringConfig& cfg = {}) {
  ExpressiveResult r;
  for (const auto& c : category_names()) {
    r.per_category[c] = 0.0;
    r.category_scores[c] = 0.0;
  }
  const auto& w = spec.weights;
  if (spec.attention_target) world.target(*spec.attention_target);
  if (spec.intention_target) world.target(*spec.intention_target);
  if (w.attention == 0.0 && w.intention == 0.0 && w.attitude == 0.0 && w.emotion == 0.0) return r;

  const FeatureSeries f = kinematic_features(chain, traj, cfg.features);

  if (w.attention != 0.0 && spec.attention_target) {
    const Vec3 target = world.target(*spec.attention_target);
    double integral = 0.0;
    const std::size_t n = f.head.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double s = attention_score(f.head[i], target);
      integral += (i == 0 || i + 1 == n) ? 0.5 * s : s;
    }
    integral = n < 2 ? 0.0 : integral * traj.dt;
    r.category_scores["attention"] = n < 2 ? attention_score(f.head[0], target) : integral / f.duration();
    r.per_category["attention"] = w.attention * integral;
  }
  if (w.intention != 0.0) {
    std::optional<Vec3> target = spec.intention_target ? world.find(*spec.intention_target) : intention_point;
    if (target) {
      const double s = intention_score(traj, f, *target, spec.intention_window, cfg.features.pause_speed);
      r.category_scores["intention"] = s;
      r.per_category["intention"] = w.intention * s;
    }
  }
  if (w.attitude != 0.0 || w.emotion != 0.0) {
    const auto ae = attitude_emotion_score(f, spec, cfg);
    r.category_scores["attitude"] = ae.attitude;
    r.category_scores["emotion"] = ae.emotion;
    r.per_category["attitude"] = w.attitude * ae.attitude;
    r.per_category["emotion"] = w.emotion * ae.emotion;
  }
  r.E = r.per_category["intention"] + r.per_category["attention"] + r.per_category["attitude"] +
        r.per_category["emotion"];
  return r;
}

inline ExpressiveResult expressive_utility(const ChainSpec& chain, const Trajectory& traj, const WorldState& world,
                                           const ExpressionSpec& spec, const ScoringConfig& cfg = {}) {
  return expressive_utility(chain, traj, world, spec, std::nullopt, cfg);
}

inline UtilityReport make_report(double F, const ExpressiveResult& e, double gamma) {
  if (!(gamma >= 0.0)) fail(ErrorCode::InvalidInput, "gamma must be >= 0");
  UtilityReport r;
  r.F = F;
  r.E = e.E;
  r.per_category = e.per_category;
  r.category_scores = e.category_scores;
  r.gamma = gamma;
  r.total = F + gamma * e.E;
  return r;
}

/// Full report against a pre-resolved goal (avoids repeating goal IK in search loops).
inline UtilityReport total_utility(const ChainSpec& chain, const Trajectory& traj, const TaskSpec& task,
                                   const ResolvedGoal& goal, double gamma, const ExpressionSpec& spec,
                                   const ScoringConfig& cfg = {}) {
  const double F = functional_utility(traj, goal);
  return make_report(F, expressive_utility(chain, traj, task.world, spec, goal_point(chain, task), cfg), gamma);
}

inline UtilityReport total_utility(const ChainSpec& chain, const Trajectory& traj, const TaskSpec& task, double gamma,
                                   const ExpressionSpec& spec, const ScoringConfig& cfg = {}) {
  return total_utility(chain, traj, task, resolve_goal(chain, task), gamma, spec, cfg);
}

}  // namespace lampmotion
