/**
 * @file kinematics.hpp
 * @brief Serial-chain model of the lamp: forward kinematics, damped least
 * squares inverse kinematics, joint limits and reachability.
 *
 * Every joint is revolute. Joint i rotates about its own axis and then
 * translates by its fixed offset to reach joint i+1; the head reference point
 * sits at head_offset past the last joint.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lampmotion/errors.hpp"

namespace lampmotion {

inline constexpr std::size_t kJointCount = 6;
inline constexpr double kPi = 3.14159265358979323846;

using JointVector = Eigen::Matrix<double, 6, 1>;
using Vec3 = Eigen::Vector3d;

struct JointSpec {
  std::string name;
  Vec3 axis = Vec3::UnitZ();
  Vec3 offset = Vec3::Zero();  ///< translation to the next joint, in this joint's frame
  double lower = -kPi;
  double upper = kPi;
  double max_speed = 1.0;  ///< rad/s
};

/// One joint's share of a named gesture; the gesture offset on `joint` is gain * signal.
struct GestureTerm {
  int joint = 0;
  double gain = 1.0;
};

using GestureMap = std::map<std::string, std::vector<GestureTerm>>;

struct IkSettings {
  double damping = 0.05;
  int max_iterations = 300;
  double step_clamp = 0.2;          ///< max |dq| per iteration, rad
  double position_tolerance = 1e-3; ///< m
  double facing_tolerance = 1e-2;   ///< rad
  double facing_weight = 0.2;       ///< m per rad when stacking facing error with position error
};

struct ChainSpec {
  std::string id;
  std::array<JointSpec, kJointCount> joints;
  Vec3 head_offset = Vec3::Zero();
  Vec3 forward_axis = Vec3::UnitX();
  GestureMap gestures;
  IkSettings ik;

  /// Upper bound on the distance from the base to the head.
  double reach() const {
    double total = head_offset.norm();
    for (const auto& j : joints) total += j.offset.norm();
    return total;
  }

  const std::vector<GestureTerm>& gesture(const std::string& name) const {
    auto it = gestures.find(name);
    if (it == gestures.end())
      fail(ErrorCode::InvalidConfig, "chain '" + id + "' has no mapping for gesture '" + name + "'");
    return it->second;
  }

  void validate() const {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto& j = joints[i];
      const std::string where = "joint " + std::to_string(i) + " (" + j.name + ")";
      if (!(j.lower < j.upper)) fail(ErrorCode::InvalidConfig, where + ": lower limit must be below upper");
      if (std::abs(j.axis.norm() - 1.0) > 1e-9) fail(ErrorCode::InvalidConfig, where + ": axis must be unit length");
      if (!(j.max_speed > 0.0)) fail(ErrorCode::InvalidConfig, where + ": max speed must be positive");
      if (!j.offset.allFinite()) fail(ErrorCode::InvalidConfig, where + ": offset must be finite");
    }
    if (std::abs(forward_axis.norm() - 1.0) > 1e-9) fail(ErrorCode::InvalidConfig, "forward axis must be unit length");
    if (!head_offset.allFinite()) fail(ErrorCode::InvalidConfig, "head offset must be finite");
    for (const auto& [name, terms] : gestures) {
      for (const auto& t : terms) {
        if (t.joint < 0 || t.joint >= static_cast<int>(kJointCount))
          fail(ErrorCode::InvalidConfig, "gesture '" + name + "' references joint out of range");
      }
    }
    if (!(ik.damping > 0.0) || ik.max_iterations <= 0 || !(ik.step_clamp > 0.0) ||
        !(ik.position_tolerance > 0.0) || !(ik.facing_tolerance > 0.0) || !(ik.facing_weight > 0.0))
      fail(ErrorCode::InvalidConfig, "IK settings must be positive");
  }
};

/// Desk-scale lamp: base yaw, shoulder pitch, elbow pitch, forearm roll, wrist pitch, wrist roll.
inline ChainSpec default_chain() {
  ChainSpec c;
  c.id = "lamp-desk-v1";
  c.joints[0] = {"base_yaw", Vec3::UnitZ(), Vec3(0, 0, 0.11), -2.6, 2.6, 1.5};
  c.joints[1] = {"shoulder_pitch", Vec3::UnitY(), Vec3(0, 0, 0.25), -1.5, 1.5, 1.2};
  c.joints[2] = {"elbow_pitch", Vec3::UnitY(), Vec3(0.25, 0, 0), -1.9, 1.6, 1.5};
  c.joints[3] = {"forearm_roll", Vec3::UnitX(), Vec3(0.065, 0, 0), -2.6, 2.6, 2.5};
  c.joints[4] = {"wrist_pitch", Vec3::UnitY(), Vec3(0.065, 0, 0), -1.8, 1.8, 2.5};
  c.joints[5] = {"wrist_roll", Vec3::UnitX(), Vec3(0.04, 0, 0), -2.6, 2.6, 3.0};
  c.head_offset = Vec3(0.05, 0, 0);
  c.forward_axis = Vec3::UnitX();
  c.gestures = {
      {"nod", {{4, 1.0}}},
      {"shake", {{0, 1.0}}},
      {"wag", {{3, 1.0}}},
      {"lower_head", {{4, 1.0}}},
      {"lean", {{1, 1.0}}},
      {"stretch", {{1, -0.5}, {2, 1.0}}},
      {"jerk", {{1, 1.0}}},
      {"beat", {{4, 1.0}, {3, 1.0}}},
  };
  return c;
}

struct Pose {
  Vec3 position = Vec3::Zero();
  Vec3 facing = Vec3::UnitX();
};

struct PoseGoal {
  Vec3 position = Vec3::Zero();
  std::optional<Vec3> facing;  ///< unit vector when present
};

/// World-frame frames of every joint and the head for one configuration.
struct ChainFrames {
  std::array<Vec3, kJointCount> joint_origins;
  std::array<Vec3, kJointCount> joint_axes;
  Pose head;
};

inline ChainFrames chain_frames(const ChainSpec& chain, const JointVector& q) {
  ChainFrames out;
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Vec3 pos = Vec3::Zero();
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto& j = chain.joints[i];
    out.joint_origins[i] = pos;
    out.joint_axes[i] = rot * j.axis;
    rot = rot * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis).toRotationMatrix();
    pos = pos + rot * j.offset;
  }
  out.head.position = pos + rot * chain.head_offset;
  out.head.facing = (rot * chain.forward_axis).normalized();
  return out;
}

inline Pose forward_kinematics(const ChainSpec& chain, const JointVector& q) {
  return chain_frames(chain, q).head;
}

inline JointVector clamp_to_limits(const ChainSpec& chain, const JointVector& q) {
  JointVector out = q;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(q[k], chain.joints[i].lower, chain.joints[i].upper);
  }
  return out;
}

inline bool within_limits(const ChainSpec& chain, const JointVector& q) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(v) || v < chain.joints[i].lower || v > chain.joints[i].upper) return false;
  }
  return true;
}

/// Angle between two directions, via clamped arccos of the normalized dot product.
inline double facing_error(const Vec3& a, const Vec3& b) {
  const double d = a.normalized().dot(b.normalized());
  return std::acos(std::clamp(d, -1.0, 1.0));
}

/// Raised when no configuration meets the goal; carries the configuration
/// that came closest so callers can still show the attempt.
class UnreachableError : public MotionError {
 public:
  UnreachableError(const std::string& what, JointVector best_effort, double residual)
      : MotionError(ErrorCode::Unreachable, what), best_effort_(std::move(best_effort)), residual_(residual) {}

  const JointVector& best_effort() const noexcept { return best_effort_; }
  double residual() const noexcept { return residual_; }

 private:
  JointVector best_effort_;
  double residual_;
};

namespace detail {

struct IkAttempt {
  JointVector q;
  double position_error = std::numeric_limits<double>::infinity();
  double facing_error = 0.0;
  bool converged = false;
};

inline bool goal_met(const ChainSpec& chain, const PoseGoal& goal, double tol, double pos_err, double face_err) {
  return pos_err <= tol && (!goal.facing || face_err <= chain.ik.facing_tolerance);
}

inline IkAttempt solve_dls(const ChainSpec& chain, const PoseGoal& goal, const JointVector& seed, double tol) {
  const IkSettings& s = chain.ik;
  const bool with_facing = goal.facing.has_value();
  const Eigen::Index rows = with_facing ? 6 : 3;
  const Vec3 goal_facing = with_facing ? goal.facing->normalized() : Vec3::UnitX();

  IkAttempt best;
  JointVector q = clamp_to_limits(chain, seed);
  Eigen::MatrixXd jac(rows, 6);
  Eigen::VectorXd err(rows);

  for (int it = 0; it <= s.max_iterations; ++it) {
    const ChainFrames f = chain_frames(chain, q);
    const Vec3 dp = goal.position - f.head.position;
    const double pos_err = dp.norm();
    const double face_err = with_facing ? facing_error(f.head.facing, goal_facing) : 0.0;

    const double score = pos_err + (with_facing ? s.facing_weight * face_err : 0.0);
    const double best_score = best.position_error + (with_facing ? s.facing_weight * best.facing_error : 0.0);
    if (score < best_score) {
      best.q = q;
      best.position_error = pos_err;
      best.facing_error = face_err;
    }
    if (goal_met(chain, goal, tol, pos_err, face_err)) {
      best.q = q;
      best.position_error = pos_err;
      best.facing_error = face_err;
      best.converged = true;
      return best;
    }
    if (it == s.max_iterations) break;

    for (Eigen::Index i = 0; i < 6; ++i) {
      const Vec3& axis = f.joint_axes[static_cast<std::size_t>(i)];
      jac.block<3, 1>(0, i) = axis.cross(f.head.position - f.joint_origins[static_cast<std::size_t>(i)]);
      if (with_facing) jac.block<3, 1>(3, i) = s.facing_weight * axis.cross(f.head.facing);
    }
    err.head<3>() = dp;
    if (with_facing) err.tail<3>() = s.facing_weight * (goal_facing - f.head.facing);

    const Eigen::MatrixXd jjt =
        jac * jac.transpose() + (s.damping * s.damping) * Eigen::MatrixXd::Identity(rows, rows);
    JointVector dq = jac.transpose() * jjt.ldlt().solve(err);
    const double peak = dq.cwiseAbs().maxCoeff();
    if (peak > s.step_clamp) dq *= s.step_clamp / peak;
    q = clamp_to_limits(chain, q + dq);
  }
  return best;
}

}  // namespace detail

/// Deterministic seeds spanning the limit box. The first group aims the base
/// yaw at `toward`; the second turns it away and bends back over the base,
/// which is the only way to reach points behind a yaw range short of a full turn.
inline std::vector<JointVector> canonical_seeds(const ChainSpec& chain, const Vec3& toward) {
  static constexpr std::array<std::array<double, kJointCount>, 5> facing{{
      {0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
      {0.5, 0.6, 0.35, 0.5, 0.6, 0.5},
      {0.5, 0.35, 0.65, 0.5, 0.35, 0.5},
      {0.5, 0.7, 0.7, 0.5, 0.5, 0.5},
      {0.5, 0.3, 0.3, 0.5, 0.7, 0.5},
  }};
  static constexpr std::array<std::array<double, kJointCount>, 4> over{{
      {0.5, 0.2, 0.25, 0.5, 0.5, 0.5},
      {0.5, 0.1, 0.1, 0.5, 0.5, 0.5},
      {0.5, 0.3, 0.45, 0.5, 0.6, 0.5},
      {0.5, 0.05, 0.08, 0.5, 0.85, 0.5},
  }};
  const bool planar = toward.head<2>().norm() > 1e-9;
  const double yaw = std::atan2(toward.y(), toward.x());
  const double flipped = yaw > 0.0 ? yaw - kPi : yaw + kPi;
  std::vector<JointVector> seeds;
  const auto add = [&](const std::array<double, kJointCount>& frac, double base_yaw) {
    JointVector q;
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto& j = chain.joints[i];
      q[static_cast<Eigen::Index>(i)] = j.lower + frac[i] * (j.upper - j.lower);
    }
    if (planar) q[0] = std::clamp(base_yaw, chain.joints[0].lower, chain.joints[0].upper);
    seeds.push_back(q);
  };
  for (const auto& frac : facing) add(frac, yaw);
  for (const auto& frac : over) add(frac, flipped);
  // Low-discrepancy fill of the whole box for the awkward corners.
  static constexpr std::array<int, kJointCount> primes{2, 3, 5, 7, 11, 13};
  for (int n = 1; n <= 16; ++n) {
    JointVector q;
    for (std::size_t i = 0; i < kJointCount; ++i) {
      double f = 1.0, r = 0.0;
      for (int k = n; k > 0; k /= primes[i]) {
        f /= primes[i];
        r += f * (k % primes[i]);
      }
      const auto& j = chain.joints[i];
      q[static_cast<Eigen::Index>(i)] = j.lower + r * (j.upper - j.lower);
    }
    seeds.push_back(q);
  }
  return seeds;
}

/// Damped least squares IK. Tries `seed` first, then the canonical seeds.
/// Throws UnreachableError carrying the closest configuration found.
inline JointVector inverse_kinematics(const ChainSpec& chain, const PoseGoal& goal, const JointVector& seed,
                                      double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidInput, "IK tolerance must be positive");
  if (!goal.position.allFinite() || (goal.facing && !goal.facing->allFinite()))
    fail(ErrorCode::InvalidInput, "IK goal must be finite");
  if (goal.facing && goal.facing->norm() < 1e-12) fail(ErrorCode::InvalidInput, "IK facing goal must be non-zero");

  std::vector<JointVector> seeds{seed};
  for (auto& s : canonical_seeds(chain, goal.position)) seeds.push_back(std::move(s));

  detail::IkAttempt best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& s : seeds) {
    auto attempt = detail::solve_dls(chain, goal, s, tol);
    if (attempt.converged) return attempt.q;
    const double score = attempt.position_error + chain.ik.facing_weight * attempt.facing_error;
    if (score < best_score) {
      best_score = score;
      best = attempt;
    }
  }
  throw UnreachableError("goal unreachable: residual " + std::to_string(best.position_error) + " m", best.q,
                         best.position_error);
}

inline JointVector inverse_kinematics(const ChainSpec& chain, const PoseGoal& goal, const JointVector& seed) {
  return inverse_kinematics(chain, goal, seed, chain.ik.position_tolerance);
}

inline bool reachable(const ChainSpec& chain, const Vec3& point) {
  if (!point.allFinite()) return false;
  if (point.norm() > chain.reach()) return false;
  const PoseGoal goal{point, std::nullopt};
  for (const auto& seed : canonical_seeds(chain, point)) {
    if (detail::solve_dls(chain, goal, seed, chain.ik.position_tolerance).converged) return true;
  }
  return false;
}

}  // namespace lampmotion
