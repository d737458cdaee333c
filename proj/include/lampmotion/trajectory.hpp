/**
 * @file trajectory.hpp
 * @brief Time-sampled joint trajectories with tool events, trapezoidal
 * interpolation, resampling and kinematic feature extraction.
 */
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/kinematics.hpp"

namespace lampmotion {

struct ToolState {
  bool light_on = false;
  double light_intensity = 0.0;
  bool projector_on = false;
  std::optional<std::string> projected_content;

  bool operator==(const ToolState&) const = default;

  void validate() const {
    if (!(light_intensity >= 0.0 && light_intensity <= 1.0))
      fail(ErrorCode::InvalidInput, "light intensity must lie in [0, 1]");
    if (projected_content && !projector_on)
      fail(ErrorCode::InvalidInput, "projected content requires the projector to be on");
  }
};

struct WorldState {
  Vec3 user_position = Vec3::Zero();
  std::optional<Vec3> user_attention_point;
  std::map<std::string, Vec3> objects;
  std::vector<double> beat_times;

  /// Resolves "user", "user_attention" or an object name.
  std::optional<Vec3> find(const std::string& name) const {
    if (name == "user") return user_position;
    if (name == "user_attention") return user_attention_point;
    auto it = objects.find(name);
    if (it == objects.end()) return std::nullopt;
    return it->second;
  }

  Vec3 target(const std::string& name) const {
    auto p = find(name);
    if (!p) fail(ErrorCode::TargetMissing, "world has no target named '" + name + "'");
    return *p;
  }

  void validate() const {
    if (!user_position.allFinite()) fail(ErrorCode::InvalidInput, "user position must be finite");
    if (user_attention_point && !user_attention_point->allFinite())
      fail(ErrorCode::InvalidInput, "user attention point must be finite");
    for (const auto& [name, p] : objects)
      if (!p.allFinite()) fail(ErrorCode::InvalidInput, "object '" + name + "' position must be finite");
    for (std::size_t i = 1; i < beat_times.size(); ++i)
      if (!(beat_times[i] > beat_times[i - 1])) fail(ErrorCode::InvalidInput, "beat times must be strictly ascending");
  }
};

/// Robot-side part of a state; the world context is held once per trajectory.
struct Sample {
  JointVector q = JointVector::Zero();
  ToolState tool;

  bool operator==(const Sample& o) const { return q == o.q && tool == o.tool; }
};

struct State {
  JointVector q = JointVector::Zero();
  ToolState tool;
  WorldState world;
};

struct Action {
  JointVector dq = JointVector::Zero();
  std::optional<ToolState> tool_event;
};

/// Provenance of a primitive: it occupies samples [first, last].
struct Annotation {
  std::size_t first = 0;
  std::size_t last = 0;
  std::string primitive;

  bool operator==(const Annotation&) const = default;
};

struct Trajectory {
  double dt = 0.02;
  std::vector<Sample> samples;
  std::vector<Annotation> annotations;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
  double duration() const { return samples.empty() ? 0.0 : time(samples.size() - 1); }
  const Sample& terminal() const { return samples.back(); }
  const Sample& front() const { return samples.front(); }

  /// Samples and timing equal; annotations are provenance and not compared.
  bool same_motion(const Trajectory& o) const { return dt == o.dt && samples == o.samples; }
  bool operator==(const Trajectory& o) const { return same_motion(o) && annotations == o.annotations; }
};

struct TrajectorySettings {
  double dt = 0.02;
  double ramp_time = 0.25;  ///< trapezoid acceleration phase, s
};

/// Deterministic transition: applies an action to a state. Throws InvalidInput
/// if the result leaves the joint limits or exceeds a joint speed cap over dt.
inline State transition(const ChainSpec& chain, const State& s, const Action& a, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidInput, "dt must be positive");
  State next = s;
  next.q = s.q + a.dq;
  if (!within_limits(chain, next.q)) fail(ErrorCode::InvalidInput, "action leaves joint limits");
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (std::abs(a.dq[static_cast<Eigen::Index>(i)]) > chain.joints[i].max_speed * dt * (1.0 + 1e-9))
      fail(ErrorCode::InvalidInput, "action exceeds joint " + std::to_string(i) + " speed cap");
  }
  if (a.tool_event) {
    a.tool_event->validate();
    next.tool = *a.tool_event;
  }
  return next;
}

struct Violation {
  std::size_t sample = 0;
  std::size_t joint = 0;
  std::string what;
};

/// Joint-limit and speed-cap violations. An empty result means the trajectory is valid.
inline std::vector<Violation> find_violations(const ChainSpec& chain, const Trajectory& traj) {
  std::vector<Violation> out;
  if (traj.samples.empty()) {
    out.push_back({0, 0, "trajectory has no samples"});
    return out;
  }
  if (!(traj.dt > 0.0)) out.push_back({0, 0, "dt must be positive"});
  for (std::size_t s = 0; s < traj.samples.size(); ++s) {
    const auto& q = traj.samples[s].q;
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const double v = q[static_cast<Eigen::Index>(i)];
      if (!std::isfinite(v) || v < chain.joints[i].lower || v > chain.joints[i].upper)
        out.push_back({s, i, "joint limit"});
      if (s > 0) {
        const double step = std::abs(v - traj.samples[s - 1].q[static_cast<Eigen::Index>(i)]);
        if (step > chain.joints[i].max_speed * traj.dt * (1.0 + 1e-9)) out.push_back({s, i, "speed cap"});
      }
    }
  }
  return out;
}

inline bool is_valid(const ChainSpec& chain, const Trajectory& traj) { return find_violations(chain, traj).empty(); }

#ifndef NDEBUG
#define LAMPMOTION_ASSERT_VALID(chain, traj) assert(::lampmotion::is_valid((chain), (traj)))
#else
#define LAMPMOTION_ASSERT_VALID(chain, traj) ((void)0)
#endif

/// Trapezoidal time law along the unit path parameter.
struct TrapezoidProfile {
  double peak_rate = 0.0;  ///< ds/dt at cruise
  double accel = 0.0;      ///< d2s/dt2
  double ramp = 0.0;       ///< accel phase duration
  double total = 0.0;      ///< duration

  static TrapezoidProfile make(double peak_rate, double ramp_time) {
    TrapezoidProfile p;
    p.accel = peak_rate / ramp_time;
    if (peak_rate * ramp_time <= 1.0) {
      p.peak_rate = peak_rate;
      p.ramp = ramp_time;
      p.total = 1.0 / peak_rate + ramp_time;
    } else {
      // Triangular: never reaches cruise.
      p.ramp = std::sqrt(1.0 / p.accel);
      p.peak_rate = p.accel * p.ramp;
      p.total = 2.0 * p.ramp;
    }
    return p;
  }

  double at(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= total) return 1.0;
    if (t < ramp) return 0.5 * accel * t * t;
    const double cruise_end = total - ramp;
    if (t <= cruise_end) return 0.5 * accel * ramp * ramp + peak_rate * (t - ramp);
    const double r = total - t;
    return 1.0 - 0.5 * accel * r * r;
  }
};

/// Straight joint-space move from q_start to q_goal with a trapezoidal speed
/// profile at speed_scale times the joint speed limits. The last sample is q_goal.
inline Trajectory interpolate(const ChainSpec& chain, const JointVector& q_start, const JointVector& q_goal, double dt,
                              double speed_scale = 1.0, double ramp_time = TrajectorySettings{}.ramp_time) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidInput, "dt must be positive");
  if (!(speed_scale > 0.0 && speed_scale <= 1.0)) fail(ErrorCode::InvalidInput, "speed scale must lie in (0, 1]");
  if (!(ramp_time > 0.0)) fail(ErrorCode::InvalidInput, "ramp time must be positive");
  if (!within_limits(chain, q_start) || !within_limits(chain, q_goal))
    fail(ErrorCode::InvalidInput, "interpolation endpoints must lie within joint limits");

  Trajectory traj;
  traj.dt = dt;
  const JointVector delta = q_goal - q_start;
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const double d = std::abs(delta[static_cast<Eigen::Index>(i)]);
    if (d > 0.0) rate = std::min(rate, speed_scale * chain.joints[i].max_speed / d);
  }
  if (!std::isfinite(rate)) {
    traj.samples.push_back({q_start, {}});
    return traj;
  }
  const auto profile = TrapezoidProfile::make(rate, ramp_time);
  const auto n = static_cast<std::size_t>(std::ceil(profile.total / dt - 1e-9));
  traj.samples.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = profile.at(static_cast<double>(k) * dt);
    traj.samples.push_back({q_start + s * delta, {}});
  }
  traj.samples.push_back({q_goal, {}});
  LAMPMOTION_ASSERT_VALID(chain, traj);
  return traj;
}

/// Linear resampling at new_dt. Both endpoints are kept exactly; tool states
/// come from the nearest original sample.
inline Trajectory resample(const Trajectory& traj, double new_dt) {
  if (!(new_dt > 0.0)) fail(ErrorCode::InvalidInput, "resample interval must be positive");
  if (traj.samples.empty()) fail(ErrorCode::InvalidInput, "cannot resample an empty trajectory");
  if (new_dt == traj.dt) return traj;

  Trajectory out;
  out.dt = new_dt;
  const std::size_t last = traj.samples.size() - 1;
  const double span = static_cast<double>(last);  // in original samples
  const double ratio = new_dt / traj.dt;
  const auto m = static_cast<std::size_t>(std::ceil(span / ratio - 1e-9));
  out.samples.reserve(m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    const double u = std::min(static_cast<double>(k) * ratio, span);
    const auto lo = static_cast<std::size_t>(std::floor(u));
    const auto hi = std::min(lo + 1, last);
    const double w = u - static_cast<double>(lo);
    Sample s;
    s.q = w == 0.0 ? traj.samples[lo].q : (1.0 - w) * traj.samples[lo].q + w * traj.samples[hi].q;
    s.tool = traj.samples[std::min(static_cast<std::size_t>(std::lround(u)), last)].tool;
    out.samples.push_back(std::move(s));
  }
  out.samples.push_back(traj.samples.back());

  const auto rescale = [&](std::size_t idx) {
    return std::min(static_cast<std::size_t>(std::lround(static_cast<double>(idx) / ratio)), out.samples.size() - 1);
  };
  for (const auto& a : traj.annotations) out.annotations.push_back({rescale(a.first), rescale(a.last), a.primitive});
  return out;
}

struct Pause {
  double start = 0.0;
  double duration = 0.0;
};

struct FeatureSettings {
  double pause_speed = 0.01;        ///< head speed below this is "still", m/s
  double pause_min_duration = 0.2;  ///< s
};

/// Head-space kinematic features. speed is |v|; acceleration and jerk are the
/// first and second time derivatives of speed (tangential quantities).
struct FeatureSeries {
  double dt = 0.0;
  std::vector<Pose> head;
  std::vector<double> speed;
  std::vector<double> acceleration;
  std::vector<double> jerk;
  std::vector<double> interval_speed;  ///< |p[i+1] - p[i]| / dt, one per interval
  std::vector<Pause> pauses;

  double duration() const { return head.empty() ? 0.0 : static_cast<double>(head.size() - 1) * dt; }
};

namespace detail {

inline std::vector<double> gradient(const std::vector<double>& x, double dt) {
  std::vector<double> g(x.size(), 0.0);
  const std::size_t n = x.size();
  if (n < 2) return g;
  g[0] = (x[1] - x[0]) / dt;
  g[n - 1] = (x[n - 1] - x[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
  return g;
}

}  // namespace detail

inline FeatureSeries kinematic_features(const ChainSpec& chain, const Trajectory& traj,
                                        const FeatureSettings& settings = {}) {
  if (traj.samples.empty()) fail(ErrorCode::InvalidInput, "features need at least one sample");
  FeatureSeries f;
  f.dt = traj.dt;
  const std::size_t n = traj.samples.size();
  f.head.reserve(n);
  for (const auto& s : traj.samples) f.head.push_back(forward_kinematics(chain, s.q));

  f.speed.assign(n, 0.0);
  if (n >= 2) {
    f.speed[0] = (f.head[1].position - f.head[0].position).norm() / traj.dt;
    f.speed[n - 1] = (f.head[n - 1].position - f.head[n - 2].position).norm() / traj.dt;
    for (std::size_t i = 1; i + 1 < n; ++i)
      f.speed[i] = (f.head[i + 1].position - f.head[i - 1].position).norm() / (2.0 * traj.dt);
  }
  f.acceleration = detail::gradient(f.speed, traj.dt);
  f.jerk = n >= 3 ? detail::gradient(f.acceleration, traj.dt) : std::vector<double>(n, 0.0);

  for (std::size_t i = 0; i + 1 < n; ++i)
    f.interval_speed.push_back((f.head[i + 1].position - f.head[i].position).norm() / traj.dt);

  std::size_t run = 0;
  const auto close_run = [&](std::size_t end_interval) {
    const double d = static_cast<double>(run) * traj.dt;
    if (run > 0 && d >= settings.pause_min_duration - 1e-9)
      f.pauses.push_back({static_cast<double>(end_interval - run) * traj.dt, d});
    run = 0;
  };
  for (std::size_t i = 0; i < f.interval_speed.size(); ++i) {
    if (f.interval_speed[i] < settings.pause_speed) {
      ++run;
    } else {
      close_run(i);
    }
  }
  close_run(f.interval_speed.size());
  return f;
}

}  // namespace lampmotion
