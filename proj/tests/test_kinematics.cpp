#include <catch_amalgamated.hpp>

#include <random>

#include "lampmotion/kinematics.hpp"
#include "oracles/fk_oracle.hpp"

using namespace lampmotion;
using Catch::Approx;

namespace {

JointVector random_q(const ChainSpec& chain, std::mt19937_64& rng) {
  JointVector q;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    std::uniform_real_distribution<double> d(chain.joints[i].lower, chain.joints[i].upper);
    q[static_cast<Eigen::Index>(i)] = d(rng);
  }
  return q;
}

oracle::Result oracle_pose(const ChainSpec& chain, const JointVector& q) {
  std::array<oracle::Joint, 6> joints;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& j = chain.joints[i];
    joints[i] = {{j.axis.x(), j.axis.y(), j.axis.z()}, {j.offset.x(), j.offset.y(), j.offset.z()}};
  }
  std::array<double, 6> qa;
  for (int i = 0; i < 6; ++i) qa[static_cast<std::size_t>(i)] = q[i];
  return oracle::head_pose(joints, {chain.head_offset.x(), chain.head_offset.y(), chain.head_offset.z()},
                           {chain.forward_axis.x(), chain.forward_axis.y(), chain.forward_axis.z()}, qa);
}

}  // namespace

TEST_CASE("default chain is valid and matches the documented geometry") {
  const ChainSpec c = default_chain();
  REQUIRE_NOTHROW(c.validate());
  const double offsets[] = {0.11, 0.25, 0.25, 0.065, 0.065, 0.04};
  for (std::size_t i = 0; i < kJointCount; ++i) {
    CHECK(c.joints[i].offset.norm() == Approx(offsets[i]).epsilon(1e-15));
    CHECK(c.joints[i].lower < c.joints[i].upper);
    CHECK(c.joints[i].max_speed > 0.0);
  }
  CHECK(c.ik.damping == 0.05);
  CHECK(c.ik.max_iterations == 300);
  CHECK(c.ik.step_clamp == 0.2);
}

TEST_CASE("chain validation rejects malformed specs") {
  ChainSpec c = default_chain();
  SECTION("inverted limits") { c.joints[2].lower = c.joints[2].upper; }
  SECTION("non-unit axis") { c.joints[1].axis = Vec3(0, 2, 0); }
  SECTION("zero speed") { c.joints[0].max_speed = 0.0; }
  SECTION("gesture joint out of range") { c.gestures["nod"] = {{6, 1.0}}; }
  try {
    c.validate();
    FAIL("expected InvalidConfig");
  } catch (const MotionError& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("FK at zero pose is the sum of offsets along the forward axis") {
  const ChainSpec c = default_chain();
  const Pose p = forward_kinematics(c, JointVector::Zero());
  Vec3 sum = c.head_offset;
  for (const auto& j : c.joints) sum += j.offset;
  CHECK((p.position - sum).norm() < 1e-15);
  CHECK((p.facing - c.forward_axis).norm() < 1e-15);
}

TEST_CASE("FK under base yaw of 90 degrees rotates the zero pose about z") {
  const ChainSpec c = default_chain();
  const Pose zero = forward_kinematics(c, JointVector::Zero());
  JointVector q = JointVector::Zero();
  q[0] = kPi / 2;
  const Pose p = forward_kinematics(c, q);
  CHECK(p.position.x() == Approx(-zero.position.y()).margin(1e-12));
  CHECK(p.position.y() == Approx(zero.position.x()).margin(1e-12));
  CHECK(p.position.z() == Approx(zero.position.z()).margin(1e-12));
}

TEST_CASE("FK matches frozen oracle poses") {
  // Values produced by the standalone transform-product oracle.
  struct Row {
    std::array<double, 6> q;
    std::array<double, 3> position, facing;
  };
  const Row rows[] = {
      {{0, 0, 0, 0, 0, 0}, {0.46999999999999997, 0, 0.35999999999999999}, {1, 0, 0}},
      {{0, -0.1, 0.2, 0, 0.5, 0},
       {0.41639497821187121, 0, 0.23978393169952508},
       {0.82533561490967833, 0, -0.56464247339503548}},
      {{0.7, 0.3, -0.9, 1.1, -0.6, 0.4},
       {0.36920837080639451, 0.20900058672603783, 0.63169415243021021},
       {0.73456496099565904, -0.039215655586378184, 0.67740420018950032}},
      {{-1.2, -0.8, 1.3, -2.0, 1.5, -2.2},
       {-0.081184596042694651, -0.17916223488869257, 0.18436578046225743},
       {-0.7507699814440485, -0.57201109884674761, 0.33037514700509679}},
  };
  const ChainSpec c = default_chain();
  for (const auto& r : rows) {
    JointVector q;
    for (int i = 0; i < 6; ++i) q[i] = r.q[static_cast<std::size_t>(i)];
    const Pose p = forward_kinematics(c, q);
    for (int i = 0; i < 3; ++i) {
      CHECK(p.position[i] == Approx(r.position[static_cast<std::size_t>(i)]).margin(1e-12));
      CHECK(p.facing[i] == Approx(r.facing[static_cast<std::size_t>(i)]).margin(1e-12));
    }
  }
}

TEST_CASE("FK agrees with the transform oracle on random configurations") {
  const ChainSpec c = default_chain();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const JointVector q = random_q(c, rng);
    const Pose p = forward_kinematics(c, q);
    const auto o = oracle_pose(c, q);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(p.position[i] - o.position[static_cast<std::size_t>(i)]) < 1e-9);
      CHECK(std::abs(p.facing[i] - o.facing[static_cast<std::size_t>(i)]) < 1e-9);
    }
  }
}

TEST_CASE("FK is deterministic and stays within reach") {
  const ChainSpec c = default_chain();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> wide(-10.0, 10.0);
  for (int k = 0; k < 500; ++k) {
    JointVector q;
    for (int i = 0; i < 6; ++i) q[i] = wide(rng);
    const Pose a = forward_kinematics(c, q);
    const Pose b = forward_kinematics(c, q);
    CHECK(a.position == b.position);
    CHECK(a.facing == b.facing);
    CHECK(forward_kinematics(c, clamp_to_limits(c, q)).position.norm() <= c.reach() + 1e-12);
    CHECK(std::abs(a.facing.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("clamp_to_limits") {
  const ChainSpec c = default_chain();
  JointVector inside;
  inside << 0.1, -0.2, 0.3, -0.4, 0.5, -0.6;
  CHECK(clamp_to_limits(c, inside) == inside);

  JointVector below = inside;
  below[2] = c.joints[2].lower - 1.0;
  CHECK(clamp_to_limits(c, below)[2] == c.joints[2].lower);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> wide(-6.0, 6.0);
  for (int k = 0; k < 200; ++k) {
    JointVector q;
    for (int i = 0; i < 6; ++i) q[i] = wide(rng);
    const JointVector once = clamp_to_limits(c, q);
    CHECK(clamp_to_limits(c, once) == once);
    CHECK(within_limits(c, once));
  }
}

TEST_CASE("IK returns the seed when the goal is the seed's own pose") {
  const ChainSpec c = default_chain();
  JointVector seed;
  seed << 0.3, -0.2, 0.5, 0.1, 0.4, -0.3;
  const Pose p = forward_kinematics(c, seed);
  const JointVector q = inverse_kinematics(c, {p.position, p.facing}, seed);
  CHECK((q - seed).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("IK rejects goals beyond the workspace") {
  const ChainSpec c = default_chain();
  const Vec3 far = Vec3(1, 1, 1).normalized() * (c.reach() + 0.05);
  try {
    inverse_kinematics(c, {far, std::nullopt}, JointVector::Zero());
    FAIL("expected Unreachable");
  } catch (const UnreachableError& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
    CHECK(within_limits(c, e.best_effort()));
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("IK rejects invalid tolerances") {
  const ChainSpec c = default_chain();
  CHECK_THROWS_AS(inverse_kinematics(c, {Vec3(0.3, 0, 0.3), std::nullopt}, JointVector::Zero(), 0.0), MotionError);
}

TEST_CASE("IK round trip on random reachable goals") {
  const ChainSpec c = default_chain();
  std::mt19937_64 rng(42);
  int ok = 0;
  const int n = 200;
  for (int k = 0; k < n; ++k) {
    const JointVector target = random_q(c, rng);
    const JointVector seed = random_q(c, rng);
    const Vec3 goal = forward_kinematics(c, target).position;
    try {
      const JointVector q = inverse_kinematics(c, {goal, std::nullopt}, seed);
      REQUIRE(within_limits(c, q));
      const double err = (forward_kinematics(c, q).position - goal).norm();
      REQUIRE(err <= c.ik.position_tolerance);
      if (err < 1e-3) ++ok;
    } catch (const UnreachableError&) {
    }
  }
  CHECK(ok >= 198);
}

TEST_CASE("IK honours a facing request") {
  const ChainSpec c = default_chain();
  JointVector target;
  target << -0.4, 0.2, 0.4, 0.3, -0.5, 0.2;
  const Pose p = forward_kinematics(c, target);
  const JointVector q = inverse_kinematics(c, {p.position, p.facing}, JointVector::Zero());
  const Pose r = forward_kinematics(c, q);
  CHECK((r.position - p.position).norm() <= c.ik.position_tolerance);
  CHECK(facing_error(r.facing, p.facing) <= c.ik.facing_tolerance);
}

TEST_CASE("reachable") {
  const ChainSpec c = default_chain();
  CHECK(reachable(c, forward_kinematics(c, JointVector::Zero()).position));
  CHECK_FALSE(reachable(c, Vec3(10 * c.reach(), 0, 0)));
  CHECK_FALSE(reachable(c, Vec3(std::nan(""), 0, 0)));
}

TEST_CASE("reachable holds for every attained head position") {
  const ChainSpec c = default_chain();
  std::mt19937_64 rng(5);
  int ok = 0;
  for (int k = 0; k < 500; ++k)
    if (reachable(c, forward_kinematics(c, random_q(c, rng)).position)) ++ok;
  CHECK(ok == 500);
}

TEST_CASE("reachability along a ray has a single transition") {
  const ChainSpec c = default_chain();
  const Vec3 dir = Vec3(1.0, 0.3, 0.4).normalized();
  const double step = c.ik.position_tolerance;
  int transitions = 0;
  bool previous = true;
  bool first = true;
  for (double r = 0.30; r <= c.reach() + 0.02; r += step) {
    const bool now = reachable(c, r * dir);
    if (first) {
      CHECK(now);
      first = false;
    } else if (now != previous) {
      ++transitions;
    }
    previous = now;
  }
  CHECK(transitions == 1);
  CHECK_FALSE(previous);
}
