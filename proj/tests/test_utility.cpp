#include <catch_amalgamated.hpp>

#include <random>

#include "lampmotion/primitives.hpp"
#include "lampmotion/utility.hpp"

using namespace lampmotion;
using Catch::Approx;
using K = PrimitiveKind;

namespace {

JointVector home() {
  JointVector q;
  q << 0, -0.1, 0.2, 0, 0.5, 0;
  return q;
}

JointVector away() {
  JointVector q;
  q << 0.5, 0.1, 0.1, 0, 0.7, 0;
  return q;
}

Trajectory stationary(const JointVector& q, std::size_t n, double dt = 0.02) {
  Trajectory t;
  t.dt = dt;
  t.samples.assign(n, {q, {}});
  return t;
}

ResolvedGoal goal_at(const JointVector& q) {
  ResolvedGoal g;
  g.q = q;
  g.epsilon = 1e-3;
  return g;
}

ExpressionSpec attention_only(const std::string& target) {
  ExpressionSpec s;
  s.weights.attention = 1.0;
  s.attention_target = target;
  return s;
}

}  // namespace

TEST_CASE("F counts only samples inside the goal ball") {
  // Coarse steps so that only the last sample is within epsilon of the goal.
  Trajectory t;
  for (int k = 0; k <= 10; ++k) t.samples.push_back({home() + (k / 10.0) * (away() - home()), {}});
  t.samples.back().q = away();
  SECTION("final sample alone matches") { CHECK(functional_utility(t, goal_at(away())) == 1.0); }
  SECTION("never inside the ball") {
    JointVector other = away();
    other[0] += 0.1;
    CHECK(functional_utility(t, goal_at(other)) == 0.0);
  }
  SECTION("dwelling for the last three samples") {
    t.samples.push_back(t.samples.back());
    t.samples.push_back(t.samples.back());
    CHECK(functional_utility(t, goal_at(away())) == 3.0);
  }
  SECTION("tool mismatch keeps the indicator at zero") {
    ResolvedGoal g = goal_at(away());
    g.tool.light_on = true;
    g.tool.light_intensity = 1.0;
    CHECK(functional_utility(t, g) == 0.0);
    t.samples.push_back({away(), g.tool});
    CHECK(functional_utility(t, g) == 1.0);
  }
  SECTION("unresolved goal scores zero") { CHECK(functional_utility(t, ResolvedGoal{}) == 0.0); }
}

TEST_CASE("F hand-evaluated on a short sequence") {
  // Joint errors 0.5, 0.002, 0.0005, 0.001, 0 against epsilon 1e-3: three hits.
  Trajectory t;
  for (double e : {0.5, 0.002, 0.0005, 0.001, 0.0}) {
    JointVector q = JointVector::Zero();
    q[2] = e;
    t.samples.push_back({q, {}});
  }
  CHECK(functional_utility(t, goal_at(JointVector::Zero())) == 3.0);
}

TEST_CASE("attention score at 0, 90 and 180 degrees") {
  Pose head;
  head.position = Vec3(0.1, 0.2, 0.3);
  head.facing = Vec3::UnitX();
  CHECK(attention_score(head, head.position + Vec3(0.5, 0, 0)) == Approx(1.0));
  CHECK(attention_score(head, head.position - Vec3(0.5, 0, 0)) == Approx(0.0).margin(1e-15));
  CHECK(attention_score(head, head.position + Vec3(0, 0.5, 0)) == Approx(0.5));
}

TEST_CASE("attention score is invariant under a rigid yaw of pose and target") {
  const ChainSpec c = default_chain();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(kPi / 2, Vec3::UnitZ()).toRotationMatrix();
  for (int k = 0; k < 50; ++k) {
    State s;
    s.q = home();
    for (int i = 1; i < 6; ++i) s.q[i] += d(rng);
    s.q[0] = d(rng);
    const Vec3 target(d(rng) + 0.5, d(rng), d(rng));
    State turned = s;
    turned.q[0] += kPi / 2;
    CHECK(attention_score(c, turned, rz * target) == Approx(attention_score(c, s, target)).margin(1e-12));
  }
}

TEST_CASE("intention rewards a pre-gaze toward the goal") {
  const ChainSpec c = default_chain();
  const Trajectory base = interpolate(c, home(), away(), 0.02);
  WorldState w;
  w.objects["goal"] = Vec3(0.35, 0.25, 0.0);
  const FeatureSeries fb = kinematic_features(c, base);
  CHECK(intention_score(base, fb, w.objects["goal"], 0.5, 0.01) == 0.0);

  const Trajectory t =
      apply_primitive(c, base, {K::OrientToward, {{"target", std::string("goal")}, {"duration", 1.2}}, Anchor::pre()}, w);
  const FeatureSeries f = kinematic_features(c, t);
  CHECK(intention_score(t, f, w.objects["goal"], 0.5, 0.01) > 0.9);
}

TEST_CASE("intention of a pre-gaze 90 degrees off target is one half") {
  const ChainSpec c = default_chain();
  Trajectory t = stationary(home(), 31);  // 0.6 s still
  const Trajectory move = interpolate(c, home(), away(), 0.02);
  t.samples.insert(t.samples.end(), move.samples.begin() + 1, move.samples.end());
  const Pose head = forward_kinematics(c, home());
  const Vec3 side = head.facing.cross(Vec3::UnitZ()).normalized();
  const FeatureSeries f = kinematic_features(c, t);
  CHECK(intention_score(t, f, head.position + 0.3 * side, 0.5, 0.01) == Approx(0.5).margin(1e-12));
}

TEST_CASE("attitude and emotion bounds") {
  ExpressionSpec spec;
  spec.attitude_profile = {0.3, 0.2, 0.6};
  spec.emotion_profile = {0.5, 0.1};
  ObservedProfile same{0.3, 0.2, 0.6, 0.5, 0.1};
  auto ae = attitude_emotion_score(same, spec);
  CHECK(ae.attitude == 1.0);
  CHECK(ae.emotion == 1.0);

  spec.attitude_profile = {1, 1, 1};
  spec.emotion_profile = {1, 1};
  ae = attitude_emotion_score(ObservedProfile{}, spec);
  CHECK(ae.attitude == 0.0);
  CHECK(ae.emotion == 0.0);
}

TEST_CASE("a hesitant move built with pauses matches a hesitation profile") {
  const ChainSpec c = default_chain();
  const Trajectory slow = interpolate(c, home(), away(), 0.02, 0.3);
  const Trajectory t = compose(c, slow,
                               {{K::PauseInsert, {{"duration", 0.5}}, Anchor::pre()},
                                {K::PauseInsert, {{"duration", 0.5}}, Anchor::mid()}},
                               {});
  ExpressionSpec hesitation;
  hesitation.attitude_profile = {0.4, 0.2, 0.4};
  const auto ae = attitude_emotion_score(kinematic_features(c, t), hesitation);
  CHECK(ae.attitude >= 0.85);
}

TEST_CASE("observed profile of a stationary trajectory") {
  const ChainSpec c = default_chain();
  const ObservedProfile o = observe_profile(kinematic_features(c, stationary(home(), 50)));
  CHECK(o.pause_fraction == 1.0);
  CHECK(o.speed_level == 0.0);
  CHECK(o.jerk_level == 0.0);
  CHECK(o.amplitude == Approx(0.0).margin(1e-12));
  CHECK(o.tempo == 0.0);
}

TEST_CASE("E is zero when every weight is zero") {
  const ChainSpec c = default_chain();
  WorldState w;
  const auto r = expressive_utility(c, interpolate(c, home(), away(), 0.02), w, ExpressionSpec{});
  CHECK(r.E == 0.0);
  for (const auto& [k, v] : r.per_category) CHECK(v == 0.0);
}

TEST_CASE("E of a still gaze at the user equals its duration") {
  const ChainSpec c = default_chain();
  const Pose head = forward_kinematics(c, home());
  WorldState w;
  w.user_position = head.position + 0.5 * head.facing;
  const Trajectory t = stationary(home(), 101);  // 2 s
  const auto r = expressive_utility(c, t, w, attention_only("user"));
  CHECK(r.E == Approx(2.0).epsilon(1e-12));
  CHECK(r.category_scores.at("attention") == Approx(1.0));
}

TEST_CASE("E names a missing target") {
  const ChainSpec c = default_chain();
  try {
    expressive_utility(c, stationary(home(), 3), WorldState{}, attention_only("lamp"));
    FAIL("expected TargetMissing");
  } catch (const MotionError& e) {
    CHECK(e.code() == ErrorCode::TargetMissing);
  }
}

TEST_CASE("report arithmetic") {
  ExpressiveResult e;
  e.E = 2.5;
  CHECK(make_report(1.0, e, 1.0).total == 3.5);
  CHECK(make_report(7.0, e, 0.0).total == 7.0);
  const auto one = make_report(1.0, e, 1.0), two = make_report(1.0, e, 2.0);
  CHECK(two.total - two.F == 2.0 * (one.total - one.F));
  CHECK_THROWS_AS(make_report(1.0, e, -0.5), MotionError);
}

TEST_CASE("category scores lie in [0, 1] and E grows with each weight") {
  const ChainSpec c = default_chain();
  WorldState w;
  w.user_position = Vec3(0.6, 0.45, 0.40);
  w.objects["goal"] = Vec3(0.35, 0.25, 0.0);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Trajectory base = interpolate(c, home(), away(), 0.02);
  const std::vector<std::vector<PrimitiveInstance>> plans{
      {},
      {{K::OrientToward, {{"target", std::string("user")}}, Anchor::pre()}},
      {{K::Nod, {}, Anchor::terminal_minus()}, {K::PauseInsert, {}, Anchor::mid()}},
      {{K::Wag, {}, Anchor::post()}, {K::OrientToward, {{"target", std::string("goal")}}, Anchor::pre()}},
  };
  for (const auto& plan : plans) {
    const Trajectory t = compose(c, base, plan, w);
    for (int k = 0; k < 10; ++k) {
      ExpressionSpec s;
      s.weights = {u(rng), u(rng), u(rng), u(rng)};
      s.attention_target = "user";
      s.intention_target = "goal";
      s.attitude_profile = {u(rng), u(rng), u(rng)};
      s.emotion_profile = {u(rng), u(rng)};
      const auto r = expressive_utility(c, t, w, s);
      CHECK(r.E >= 0.0);
      for (const auto& [name, v] : r.category_scores) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      double sum = 0.0;
      for (const auto& [name, v] : r.per_category) sum += v;
      CHECK(sum == Approx(r.E).epsilon(1e-12));
      for (int cat = 0; cat < 4; ++cat) {
        ExpressionSpec more = s;
        double* weights[] = {&more.weights.intention, &more.weights.attention, &more.weights.attitude,
                             &more.weights.emotion};
        *weights[cat] += 0.5;
        CHECK(expressive_utility(c, t, w, more).E >= r.E);
      }
    }
  }
}
