/**
 * @file primitives.hpp
 * @brief Kinesic and proxemic movement primitives as goal-preserving
 * trajectory transformations.
 *
 * Every primitive either inserts a segment after an anchor sample that starts
 * and ends at that sample's configuration, or re-times a span that stops short
 * of the terminal sample. The terminal sample is never touched, so expressive
 * layering cannot change where the motion ends.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/kinematics.hpp"
#include "lampmotion/trajectory.hpp"

namespace lampmotion {

enum class PrimitiveKind {
  Nod,
  Shake,
  LowerHead,
  Lean,
  Wag,
  Stretch,
  SpeedScale,
  PauseInsert,
  JerkPulse,
  OrientToward,
  PointAwayFrom,
  Approach,
  Avoid,
  AttentionShift,
  LightEmphasis,
};

inline constexpr std::array<std::pair<PrimitiveKind, std::string_view>, 15> kPrimitiveNames{{
    {PrimitiveKind::Nod, "Nod"},
    {PrimitiveKind::Shake, "Shake"},
    {PrimitiveKind::LowerHead, "LowerHead"},
    {PrimitiveKind::Lean, "Lean"},
    {PrimitiveKind::Wag, "Wag"},
    {PrimitiveKind::Stretch, "Stretch"},
    {PrimitiveKind::SpeedScale, "SpeedScale"},
    {PrimitiveKind::PauseInsert, "PauseInsert"},
    {PrimitiveKind::JerkPulse, "JerkPulse"},
    {PrimitiveKind::OrientToward, "OrientToward"},
    {PrimitiveKind::PointAwayFrom, "PointAwayFrom"},
    {PrimitiveKind::Approach, "Approach"},
    {PrimitiveKind::Avoid, "Avoid"},
    {PrimitiveKind::AttentionShift, "AttentionShift"},
    {PrimitiveKind::LightEmphasis, "LightEmphasis"},
}};

inline std::string_view to_string(PrimitiveKind k) {
  for (const auto& [kind, name] : kPrimitiveNames)
    if (kind == k) return name;
  return "?";
}

inline PrimitiveKind parse_primitive_kind(std::string_view name) {
  for (const auto& [kind, n] : kPrimitiveNames)
    if (n == name) return kind;
  fail(ErrorCode::InvalidInput, "unknown primitive kind '" + std::string(name) + "'");
}

/// Where in the base trajectory a primitive is placed.
struct Anchor {
  enum class Kind { Time, Pre, Mid, Post, TerminalMinus };
  Kind kind = Kind::Pre;
  double time = 0.0;  ///< only for Kind::Time

  bool operator==(const Anchor&) const = default;

  static Anchor at(double t) { return {Kind::Time, t}; }
  static Anchor pre() { return {Kind::Pre, 0.0}; }
  static Anchor mid() { return {Kind::Mid, 0.0}; }
  static Anchor post() { return {Kind::Post, 0.0}; }
  static Anchor terminal_minus() { return {Kind::TerminalMinus, 0.0}; }
};

inline std::string to_string(const Anchor& a) {
  switch (a.kind) {
    case Anchor::Kind::Pre: return "pre";
    case Anchor::Kind::Mid: return "mid";
    case Anchor::Kind::Post: return "post";
    case Anchor::Kind::TerminalMinus: return "terminal-";
    case Anchor::Kind::Time: {
      std::ostringstream os;
      os << a.time;
      return os.str();
    }
  }
  return "?";
}

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct PrimitiveInstance {
  PrimitiveKind kind = PrimitiveKind::PauseInsert;
  ParamMap params;
  Anchor anchor;

  bool operator==(const PrimitiveInstance&) const = default;

  double number(const std::string& key, double fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    fail(ErrorCode::InvalidInput, std::string(to_string(kind)) + ": parameter '" + key + "' must be a number");
  }

  std::optional<std::string> text(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    fail(ErrorCode::InvalidInput, std::string(to_string(kind)) + ": parameter '" + key + "' must be a string");
  }
};

/// Human-readable identifier used in trajectory annotations.
inline std::string describe(const PrimitiveInstance& p) {
  std::ostringstream os;
  os << to_string(p.kind) << '(';
  bool first = true;
  for (const auto& [k, v] : p.params) {
    if (!first) os << ',';
    first = false;
    os << k << '=';
    std::visit([&](const auto& x) { os << x; }, v);
  }
  os << ")@" << to_string(p.anchor);
  return os.str();
}

struct PrimitiveDefaults {
  double gesture_duration = 1.0;
  double standoff = 0.07;         ///< Approach stopping distance from the target, m
  double avoid_distance = 0.08;   ///< Avoid retreat distance, m
  double envelope_fraction = 0.2; ///< raised-cosine onset/offset share of a gesture
  double emphasis_floor = 0.3;    ///< LightEmphasis starting intensity
  double emphasis_peak = 1.0;
  double beat_speed_margin = 0.9; ///< beat oscillations use at most this share of a joint's speed cap
};

namespace detail {

inline bool has_amplitude(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Nod:
    case PrimitiveKind::Shake:
    case PrimitiveKind::LowerHead:
    case PrimitiveKind::Lean:
    case PrimitiveKind::Wag:
    case PrimitiveKind::Stretch:
    case PrimitiveKind::JerkPulse: return true;
    default: return false;
  }
}

inline bool needs_target(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::OrientToward:
    case PrimitiveKind::PointAwayFrom:
    case PrimitiveKind::Approach:
    case PrimitiveKind::Avoid:
    case PrimitiveKind::AttentionShift: return true;
    default: return false;
  }
}

inline double default_amplitude(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Nod: return 0.2;
    case PrimitiveKind::Shake: return 0.25;
    case PrimitiveKind::LowerHead: return 0.35;
    case PrimitiveKind::Lean: return 0.15;
    case PrimitiveKind::Wag: return 0.3;
    case PrimitiveKind::Stretch: return 0.15;
    case PrimitiveKind::JerkPulse: return 0.08;
    default: return 0.0;
  }
}

inline double default_duration(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::LowerHead: return 1.5;
    case PrimitiveKind::Wag: return 1.5;
    case PrimitiveKind::Stretch: return 1.2;
    case PrimitiveKind::JerkPulse: return 0.2;
    case PrimitiveKind::PauseInsert: return 0.5;
    case PrimitiveKind::Approach:
    case PrimitiveKind::Avoid: return 1.2;
    case PrimitiveKind::AttentionShift: return 1.6;
    default: return 1.0;
  }
}

inline double default_cycles(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Wag: return 3.0;
    default: return 2.0;
  }
}

/// 0 -> 1 with zero slope at both ends.
inline double ease(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return 0.5 * (1.0 - std::cos(kPi * x));
}

/// Raised-cosine onset and offset, flat in between.
inline double envelope(double u, double fraction) {
  if (u < fraction) return ease(u / fraction);
  if (u > 1.0 - fraction) return ease((1.0 - u) / fraction);
  return 1.0;
}

/// Keyframed weight: 0 -> 1 over [0, a], hold to b, back to 0 over [b, 1].
inline double go_hold_return(double u, double a, double b) {
  if (u <= a) return ease(u / a);
  if (u < b) return 1.0;
  return 1.0 - ease((u - b) / (1.0 - b));
}

inline std::size_t last_index(const Trajectory& t) { return t.samples.size() - 1; }

inline std::size_t max_insert_index(const Trajectory& t) {
  const std::size_t last = last_index(t);
  return last == 0 ? 0 : last - 1;
}

inline std::size_t resolve_anchor(const Trajectory& traj, const Anchor& a) {
  const std::size_t cap = max_insert_index(traj);
  switch (a.kind) {
    case Anchor::Kind::Pre: return 0;
    case Anchor::Kind::Mid: return std::min(last_index(traj) / 2, cap);
    case Anchor::Kind::TerminalMinus: return cap;
    case Anchor::Kind::Post: {
      // First sample of the stationary tail.
      std::size_t i = last_index(traj);
      while (i > 0 && traj.samples[i - 1].q == traj.samples.back().q) --i;
      return std::min(i, cap);
    }
    case Anchor::Kind::Time: {
      if (!(a.time >= 0.0)) fail(ErrorCode::InvalidInput, "anchor time must be non-negative");
      const auto k = static_cast<std::size_t>(std::llround(a.time / traj.dt));
      return std::min(k, cap);
    }
  }
  return 0;
}

/// Inserts `segment` after sample k followed by a copy of sample k.
inline Trajectory insert_after(const Trajectory& traj, std::size_t k, std::vector<Sample> segment,
                               const std::string& label) {
  Trajectory out;
  out.dt = traj.dt;
  segment.push_back(traj.samples[k]);
  const std::size_t m = segment.size();
  out.samples.reserve(traj.samples.size() + m);
  out.samples.insert(out.samples.end(), traj.samples.begin(), traj.samples.begin() + static_cast<std::ptrdiff_t>(k + 1));
  out.samples.insert(out.samples.end(), segment.begin(), segment.end());
  out.samples.insert(out.samples.end(), traj.samples.begin() + static_cast<std::ptrdiff_t>(k + 1), traj.samples.end());
  for (auto a : traj.annotations) {
    if (a.first > k) a.first += m;
    if (a.last > k) a.last += m;
    out.annotations.push_back(std::move(a));
  }
  out.annotations.push_back({k, k + m, label});
  return out;
}

/// Largest per-joint ratio of step size to speed cap over the closed loop base -> segment -> base.
inline double speed_ratio(const ChainSpec& chain, const JointVector& base, const std::vector<Sample>& seg, double dt) {
  double worst = 0.0;
  const JointVector* prev = &base;
  const auto step = [&](const JointVector& q) {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      worst = std::max(worst, std::abs(q[k] - (*prev)[k]) / (chain.joints[i].max_speed * dt));
    }
  };
  for (const auto& s : seg) {
    step(s.q);
    prev = &s.q;
  }
  step(base);
  return worst;
}

/// Largest per-joint ratio of step size to speed cap along a sample sequence.
inline double max_step_ratio(const ChainSpec& chain, const std::vector<Sample>& seq, double dt) {
  double worst = 0.0;
  for (std::size_t s = 1; s < seq.size(); ++s) {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      worst = std::max(worst, std::abs(seq[s].q[k] - seq[s - 1].q[k]) / (chain.joints[i].max_speed * dt));
    }
  }
  return worst;
}

using OffsetFn = std::function<JointVector(double)>;
using ToolFn = std::function<ToolState(double)>;

/// Samples q_k + offset(u) over u in (0, 1), clamped to limits, dilating time
/// until every step respects the speed caps.
inline std::vector<Sample> build_segment(const ChainSpec& chain, const Sample& base, double duration, double dt,
                                         const OffsetFn& offset, const ToolFn& tool) {
  auto steps = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(duration / dt)));
  for (int attempt = 0; attempt < 40; ++attempt) {
    std::vector<Sample> seg;
    seg.reserve(steps - 1);
    for (std::size_t j = 1; j < steps; ++j) {
      const double u = static_cast<double>(j) / static_cast<double>(steps);
      Sample s;
      s.q = clamp_to_limits(chain, base.q + offset(u));
      s.tool = tool ? tool(u) : base.tool;
      seg.push_back(std::move(s));
    }
    const double ratio = speed_ratio(chain, base.q, seg, dt);
    if (ratio <= 1.0) return seg;
    steps = static_cast<std::size_t>(std::ceil(static_cast<double>(steps) * ratio * 1.02)) + 1;
  }
  fail(ErrorCode::Infeasible, "segment could not be time-dilated within the speed caps");
}

inline JointVector gesture_vector(const ChainSpec& chain, const std::string& gesture) {
  JointVector v = JointVector::Zero();
  for (const auto& t : chain.gesture(gesture)) v[t.joint] += t.gain;
  return v;
}

inline double max_excursion(const JointVector& base, const std::vector<Sample>& seg) {
  double m = 0.0;
  for (const auto& s : seg) m = std::max(m, (s.q - base).cwiseAbs().maxCoeff());
  return m;
}

/// Damped least squares on the facing direction alone.
inline JointVector look_direction(const ChainSpec& chain, const JointVector& seed,
                                  const std::function<Vec3(const Vec3& head)>& desired) {
  JointVector q = seed;
  JointVector best = seed;
  double best_err = std::numeric_limits<double>::infinity();
  const double lambda2 = chain.ik.damping * chain.ik.damping;
  for (int it = 0; it < chain.ik.max_iterations; ++it) {
    const ChainFrames f = chain_frames(chain, q);
    const Vec3 want = desired(f.head.position);
    const double err = facing_error(f.head.facing, want);
    if (err < best_err) {
      best_err = err;
      best = q;
    }
    if (err < 1e-4) break;
    Eigen::Matrix<double, 3, 6> jac;
    for (std::size_t i = 0; i < kJointCount; ++i) jac.col(static_cast<Eigen::Index>(i)) = f.joint_axes[i].cross(f.head.facing);
    const Vec3 e = want - f.head.facing;
    const Eigen::Matrix3d jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix3d::Identity();
    JointVector dq = jac.transpose() * jjt.ldlt().solve(e);
    const double peak = dq.cwiseAbs().maxCoeff();
    if (peak > chain.ik.step_clamp) dq *= chain.ik.step_clamp / peak;
    q = clamp_to_limits(chain, q + dq);
  }
  return best;
}

inline JointVector look_at(const ChainSpec& chain, const JointVector& seed, const Vec3& target) {
  return look_direction(chain, seed, [&](const Vec3& head) { return (target - head).normalized(); });
}

inline JointVector solve_or_best_effort(const ChainSpec& chain, const PoseGoal& goal, const JointVector& seed) {
  try {
    return inverse_kinematics(chain, goal, seed);
  } catch (const UnreachableError& e) {
    return e.best_effort();
  }
}

inline std::string required_target(const PrimitiveInstance& p, const std::string& key = "target") {
  auto t = p.text(key);
  if (!t) fail(ErrorCode::InvalidInput, std::string(to_string(p.kind)) + " needs a '" + key + "' parameter");
  return *t;
}

}  // namespace detail

/// Checks parameter ranges and that referenced targets exist in the world.
inline void validate(const PrimitiveInstance& p, const WorldState& world) {
  const std::string name(to_string(p.kind));
  const double amplitude = p.number("amplitude", 0.0);
  if (amplitude < 0.0) fail(ErrorCode::InvalidInput, name + ": amplitude must be >= 0");
  if (p.params.count("duration") && !(p.number("duration", 0.0) > 0.0))
    fail(ErrorCode::InvalidInput, name + ": duration must be > 0");
  if (p.params.count("cycles")) {
    const double c = p.number("cycles", 1.0);
    if (c < 1.0 || c != std::floor(c)) fail(ErrorCode::InvalidInput, name + ": cycles must be an integer >= 1");
  }
  if (p.params.count("factor") && !(p.number("factor", 1.0) > 0.0))
    fail(ErrorCode::InvalidInput, name + ": factor must be > 0");
  if (p.params.count("standoff") && p.number("standoff", 0.0) < 0.0)
    fail(ErrorCode::InvalidInput, name + ": standoff must be >= 0");
  if (p.params.count("peak")) {
    const double peak = p.number("peak", 1.0);
    if (!(peak >= 0.0 && peak <= 1.0)) fail(ErrorCode::InvalidInput, name + ": peak intensity must lie in [0, 1]");
  }
  if (p.anchor.kind == Anchor::Kind::Time && !(p.anchor.time >= 0.0))
    fail(ErrorCode::InvalidInput, name + ": anchor time must be >= 0");
  if (detail::needs_target(p.kind)) world.target(detail::required_target(p));
  if (p.kind == PrimitiveKind::AttentionShift) world.target(detail::required_target(p, "target2"));
}

/// Superimposes an oscillation whose extrema fall on the beat times, inserted
/// as a dance segment just before the terminal sample. Beats earlier than the
/// insertion point are skipped. An empty beat list returns the input.
inline Trajectory align_to_beats(const ChainSpec& chain, const Trajectory& traj, const std::vector<double>& beat_times,
                                 double amplitude, const PrimitiveDefaults& defaults = {},
                                 const std::string& label = "BeatAlign") {
  if (traj.samples.empty()) fail(ErrorCode::InvalidInput, "trajectory has no samples");
  if (amplitude < 0.0) fail(ErrorCode::InvalidInput, "beat amplitude must be >= 0");
  for (std::size_t i = 1; i < beat_times.size(); ++i)
    if (!(beat_times[i] > beat_times[i - 1])) fail(ErrorCode::InvalidInput, "beat times must be strictly ascending");
  if (beat_times.empty() || amplitude == 0.0) return traj;

  const std::size_t k = detail::max_insert_index(traj);
  const double t0 = traj.time(k);
  std::vector<double> beats;
  for (double b : beat_times)
    if (b >= t0 + traj.dt) beats.push_back(b);
  if (beats.empty()) fail(ErrorCode::Infeasible, "no beats fall after the dance insertion point");

  const JointVector gains = detail::gesture_vector(chain, "beat");
  double cap = std::numeric_limits<double>::infinity();  // rad/s available on the signal
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const double g = std::abs(gains[static_cast<Eigen::Index>(i)]);
    if (g > 0.0) cap = std::min(cap, defaults.beat_speed_margin * chain.joints[i].max_speed / g);
  }
  const double lead_in = beats.front() - t0;
  const double tail = beats.size() > 1 ? 0.5 * (beats.back() - beats[beats.size() - 2]) : std::max(0.25, lead_in);
  // Peak slope of a half-cosine swing of height h over span d is h*pi/(2d).
  double amp = std::min(amplitude, cap * 2.0 * lead_in / kPi);
  amp = std::min(amp, cap * 2.0 * tail / kPi);
  for (std::size_t j = 1; j < beats.size(); ++j) amp = std::min(amp, cap * (beats[j] - beats[j - 1]) / kPi);

  const auto signal = [&](double t) {
    if (t <= beats.front()) return amp * detail::ease((t - t0) / lead_in);
    for (std::size_t j = 0; j + 1 < beats.size(); ++j) {
      if (t <= beats[j + 1]) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        const double x = (t - beats[j]) / (beats[j + 1] - beats[j]);
        return sign * amp * std::cos(kPi * x);
      }
    }
    const double last_sign = ((beats.size() - 1) % 2 == 0) ? 1.0 : -1.0;
    return last_sign * amp * (1.0 - detail::ease((t - beats.back()) / tail));
  };

  const double end = beats.back() + tail;
  const auto steps = static_cast<std::size_t>(std::ceil((end - t0) / traj.dt - 1e-9));
  const Sample& base = traj.samples[k];
  std::vector<Sample> seg;
  for (std::size_t j = 1; j < steps; ++j) {
    Sample s;
    s.q = clamp_to_limits(chain, base.q + signal(t0 + static_cast<double>(j) * traj.dt) * gains);
    s.tool = base.tool;
    seg.push_back(std::move(s));
  }
  if (detail::speed_ratio(chain, base.q, seg, traj.dt) > 1.0)
    fail(ErrorCode::Infeasible, "beat oscillation exceeds the joint speed caps");
  auto out = detail::insert_after(traj, k, std::move(seg), label);
  LAMPMOTION_ASSERT_VALID(chain, out);
  return out;
}

namespace detail {

inline Trajectory apply_speed_scale(const ChainSpec& chain, const Trajectory& traj, const PrimitiveInstance& p,
                                    std::size_t k, const std::string& label) {
  double factor = p.number("factor", 0.6);
  const std::size_t e = max_insert_index(traj);
  if (e <= k || factor == 1.0) return traj;
  const std::size_t span = e - k;

  // Faster playback is limited by the speed caps.
  double fastest = std::numeric_limits<double>::infinity();
  for (std::size_t s = k + 1; s <= e; ++s) {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      const double step = std::abs(traj.samples[s].q[j] - traj.samples[s - 1].q[j]);
      if (step > 0.0) fastest = std::min(fastest, chain.joints[i].max_speed * traj.dt / step);
    }
  }
  factor = std::min(factor, fastest);
  auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(span) / factor)));

  std::vector<Sample> retimed;
  for (int attempt = 0; attempt < 40; ++attempt) {
    retimed.clear();
    for (std::size_t j = 0; j <= count; ++j) {
      const double u = static_cast<double>(k) + static_cast<double>(j) * static_cast<double>(span) / static_cast<double>(count);
      auto lo = std::min(static_cast<std::size_t>(std::floor(u)), e);
      if (j == count) lo = e;
      const double w = u - static_cast<double>(lo);
      Sample s;
      s.q = (j == 0 || j == count || w <= 0.0) ? traj.samples[lo].q
                                               : ((1.0 - w) * traj.samples[lo].q + w * traj.samples[lo + 1].q).eval();
      s.tool = traj.samples[lo].tool;
      retimed.push_back(std::move(s));
    }
    if (max_step_ratio(chain, retimed, traj.dt) <= 1.0) break;
    count += std::max<std::size_t>(1, count / 10);
  }

  Trajectory out;
  out.dt = traj.dt;
  out.samples.assign(traj.samples.begin(), traj.samples.begin() + static_cast<std::ptrdiff_t>(k));
  out.samples.insert(out.samples.end(), retimed.begin(), retimed.end());
  out.samples.insert(out.samples.end(), traj.samples.begin() + static_cast<std::ptrdiff_t>(e + 1), traj.samples.end());
  const auto remap = [&](std::size_t idx) -> std::size_t {
    if (idx <= k) return idx;
    if (idx >= e) return idx - span + count;
    return k + static_cast<std::size_t>(std::llround(static_cast<double>(idx - k) * static_cast<double>(count) /
                                                      static_cast<double>(span)));
  };
  for (const auto& a : traj.annotations) out.annotations.push_back({remap(a.first), remap(a.last), a.primitive});
  out.annotations.push_back({k, k + count, label});
  return out;
}

}  // namespace detail

/// Applies one primitive. The output's terminal sample equals the input's exactly.
inline Trajectory apply_primitive(const ChainSpec& chain, const Trajectory& traj, const PrimitiveInstance& p,
                                  const WorldState& world, const PrimitiveDefaults& defaults = {}) {
  if (traj.samples.empty()) fail(ErrorCode::InvalidInput, "trajectory has no samples");
  validate(p, world);

  const std::string label = describe(p);
  const double amplitude = p.number("amplitude", detail::default_amplitude(p.kind));
  const double duration = p.number("duration", detail::default_duration(p.kind));
  const double cycles = p.number("cycles", detail::default_cycles(p.kind));
  const double phase = p.number("phase", 0.0);
  if (detail::has_amplitude(p.kind) && amplitude == 0.0) return traj;

  const std::size_t k = detail::resolve_anchor(traj, p.anchor);
  const Sample& base = traj.samples[k];
  const double ef = defaults.envelope_fraction;

  std::vector<Sample> seg;
  const auto gesture_segment = [&](const std::string& gesture, const std::function<double(double)>& shape) {
    const JointVector dir = detail::gesture_vector(chain, gesture);
    seg = detail::build_segment(chain, base, duration, traj.dt, [&](double u) { return (amplitude * shape(u)) * dir; },
                                nullptr);
    const double requested = amplitude * dir.cwiseAbs().maxCoeff();
    if (detail::max_excursion(base.q, seg) < 0.1 * requested)
      fail(ErrorCode::Infeasible, label + ": gesture does not fit within the joint limits");
  };
  const auto oscillation = [&](double u) {
    const double w = 2.0 * kPi * cycles;
    return detail::envelope(u, ef) * std::sin(w * u + (duration > 0 ? w * phase / duration : 0.0));
  };
  const auto excursion = [&](double u) { return detail::go_hold_return(u, 0.3, 0.7); };
  const auto keyframe_to = [&](const JointVector& target_q, double a, double b) {
    const JointVector delta = target_q - base.q;
    seg = detail::build_segment(chain, base, duration, traj.dt,
                                [&](double u) { return detail::go_hold_return(u, a, b) * delta; }, nullptr);
  };

  switch (p.kind) {
    case PrimitiveKind::Nod:
    case PrimitiveKind::Shake:
    case PrimitiveKind::Wag: {
      if (p.number("beat_sync", 0.0) != 0.0) return align_to_beats(chain, traj, world.beat_times, amplitude, defaults, label);
      const char* gesture = p.kind == PrimitiveKind::Nod ? "nod" : p.kind == PrimitiveKind::Shake ? "shake" : "wag";
      gesture_segment(gesture, oscillation);
      break;
    }
    case PrimitiveKind::LowerHead: gesture_segment("lower_head", excursion); break;
    case PrimitiveKind::Lean: gesture_segment("lean", excursion); break;
    case PrimitiveKind::Stretch:
      gesture_segment("stretch", [&](double u) { return 0.5 * (1.0 - std::cos(2.0 * kPi * cycles * u)); });
      break;
    case PrimitiveKind::JerkPulse:
      gesture_segment("jerk", [](double u) { return 1.0 - std::abs(2.0 * u - 1.0); });
      break;
    case PrimitiveKind::PauseInsert: {
      const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration / traj.dt)));
      seg.assign(m - 1, base);
      break;
    }
    case PrimitiveKind::SpeedScale: return detail::apply_speed_scale(chain, traj, p, k, label);
    case PrimitiveKind::OrientToward: {
      const Vec3 target = world.target(detail::required_target(p));
      keyframe_to(detail::look_at(chain, base.q, target), 0.25, 0.85);
      break;
    }
    case PrimitiveKind::PointAwayFrom: {
      const Vec3 target = world.target(detail::required_target(p));
      keyframe_to(detail::look_direction(chain, base.q, [&](const Vec3& head) { return (head - target).normalized(); }),
                  0.25, 0.85);
      break;
    }
    case PrimitiveKind::Approach: {
      const Vec3 target = world.target(detail::required_target(p));
      const Vec3 head = forward_kinematics(chain, base.q).position;
      const double standoff = p.number("standoff", defaults.standoff);
      Vec3 away = head - target;
      away = away.norm() > 1e-9 ? away.normalized() : Vec3::UnitZ();
      const PoseGoal goal{target + standoff * away, (-away).eval()};
      keyframe_to(detail::solve_or_best_effort(chain, goal, base.q), 0.4, 0.6);
      break;
    }
    case PrimitiveKind::Avoid: {
      const Vec3 target = world.target(detail::required_target(p));
      const Vec3 head = forward_kinematics(chain, base.q).position;
      Vec3 away = head - target;
      away = away.norm() > 1e-9 ? away.normalized() : Vec3::UnitZ();
      const PoseGoal goal{head + p.number("distance", defaults.avoid_distance) * away, std::nullopt};
      keyframe_to(detail::solve_or_best_effort(chain, goal, base.q), 0.4, 0.6);
      break;
    }
    case PrimitiveKind::AttentionShift: {
      const Vec3 first = world.target(detail::required_target(p));
      const Vec3 second = world.target(detail::required_target(p, "target2"));
      const JointVector d1 = detail::look_at(chain, base.q, first) - base.q;
      const JointVector d2 = detail::look_at(chain, base.q + d1, second) - base.q;
      seg = detail::build_segment(
          chain, base, duration, traj.dt,
          [&](double u) -> JointVector {
            if (u < 0.2) return detail::ease(u / 0.2) * d1;
            if (u < 0.4) return d1;
            if (u < 0.6) return d1 + detail::ease((u - 0.4) / 0.2) * (d2 - d1);
            if (u < 0.8) return d2;
            return (1.0 - detail::ease((u - 0.8) / 0.2)) * d2;
          },
          nullptr);
      break;
    }
    case PrimitiveKind::LightEmphasis: {
      const double baseline = base.tool.light_on ? base.tool.light_intensity : 0.0;
      const double peak = p.number("peak", defaults.emphasis_peak);
      const double floor = std::min(defaults.emphasis_floor, peak);
      seg = detail::build_segment(
          chain, base, duration, traj.dt, [](double) { return JointVector::Zero().eval(); },
          [&](double u) {
            ToolState t = base.tool;
            t.light_on = true;
            t.light_intensity = u < 0.5 ? floor + (peak - floor) * detail::ease(u / 0.5)
                                        : peak + (baseline - peak) * detail::ease((u - 0.5) / 0.5);
            return t;
          });
      break;
    }
  }

  auto out = detail::insert_after(traj, k, std::move(seg), label);
  LAMPMOTION_ASSERT_VALID(chain, out);
  return out;
}

/// Error from a plan, tagged with the index of the failing primitive.
class PlanStepError : public MotionError {
 public:
  PlanStepError(ErrorCode code, std::size_t index, const std::string& what)
      : MotionError(code, "plan step " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

inline Trajectory compose(const ChainSpec& chain, const Trajectory& traj, const std::vector<PrimitiveInstance>& plan,
                          const WorldState& world, const PrimitiveDefaults& defaults = {}) {
  Trajectory out = traj;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    try {
      out = apply_primitive(chain, out, plan[i], world, defaults);
    } catch (const MotionError& e) {
      throw PlanStepError(e.code(), i, e.what());
    }
  }
  return out;
}

}  // namespace lampmotion
