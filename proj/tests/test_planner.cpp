#include <catch_amalgamated.hpp>

#include "lampmotion/planner.hpp"

using namespace lampmotion;
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

TaskSpec joint_task() {
  TaskSpec t;
  t.id = "reach";
  t.start = home();
  t.goal = away();
  t.world.user_position = Vec3(0.6, 0.45, 0.40);
  t.world.objects["cup"] = Vec3(0.35, 0.25, 0.0);
  t.goal_target = "cup";
  return t;
}

ExpressionSpec attention_only() {
  ExpressionSpec s;
  s.weights.attention = 1.0;
  s.attention_target = "user";
  return s;
}

ExpressionSpec mixed() {
  ExpressionSpec s;
  s.weights = {0.5, 1.0, 0.5, 0.5};
  s.attention_target = "user";
  s.attitude_profile = {0.3, 0.2, 0.4};
  s.emotion_profile = {0.4, 0.3};
  return s;
}

bool gazes_at(const std::vector<PrimitiveInstance>& plan, const std::string& target) {
  for (const auto& p : plan)
    if (p.kind == K::OrientToward && p.text("target") == target) return true;
  return false;
}

}  // namespace

TEST_CASE("functional plan with the goal at the start is a single sample") {
  const ChainSpec c = default_chain();
  TaskSpec t = joint_task();
  t.goal = home();
  const Trajectory f = plan_functional(c, t);
  CHECK(f.size() == 1);
  CHECK(f.annotations.empty());
}

TEST_CASE("functional plan reaches the goal without annotations") {
  const ChainSpec c = default_chain();
  const Trajectory f = plan_functional(c, joint_task());
  CHECK(f.front().q == home());
  CHECK(f.terminal().q == away());
  CHECK(f.annotations.empty());
  CHECK(is_valid(c, f));
}

TEST_CASE("functional plan appends the goal tool event") {
  const ChainSpec c = default_chain();
  TaskSpec t = joint_task();
  t.goal_tool.light_on = true;
  t.goal_tool.light_intensity = 1.0;
  const Trajectory f = plan_functional(c, t);
  CHECK(f.terminal().tool == t.goal_tool);
  CHECK(f.samples[f.size() - 2].tool == ToolState{});
}

TEST_CASE("functional plan toward an unreachable pose carries an attempt") {
  const ChainSpec c = default_chain();
  TaskSpec t = joint_task();
  t.goal = TaskPoseGoal{Vec3(c.reach() + 0.2, 0.0, 0.2), std::nullopt, std::nullopt};
  try {
    plan_functional(c, t);
    FAIL("expected an unreachable goal");
  } catch (const TaskUnreachableError& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
    CHECK(e.residual() > 0.0);
    REQUIRE_FALSE(e.attempt().samples.empty());
    CHECK(e.attempt().terminal().q == e.best_effort());
    CHECK(is_valid(c, e.attempt()));
  }
}

TEST_CASE("functional plan longer than the horizon is infeasible") {
  const ChainSpec c = default_chain();
  TaskSpec t = joint_task();
  t.horizon = 0.1;
  try {
    plan_functional(c, t);
    FAIL("expected Infeasible");
  } catch (const MotionError& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
}

TEST_CASE("gamma 0 returns the baseline") {
  const ChainSpec c = default_chain();
  PlannerConfig config = default_planner_config();
  config.gamma = 0.0;
  const TaskSpec t = joint_task();
  const PlanResult r = plan_expressive(c, t, config, mixed());
  CHECK(r.plan.empty());
  CHECK(r.trajectory == plan_functional(c, t, config));
  CHECK(r.report.total == r.report.F);
}

TEST_CASE("attention toward the user is won by a gaze at the user") {
  const ChainSpec c = default_chain();
  PlannerConfig config = default_planner_config();
  config.exhaustive = true;
  config.max_plan_length = 2;
  const TaskSpec t = joint_task();
  const ExpressionSpec spec = attention_only();
  const PlanResult r = plan_expressive(c, t, config, spec);
  CHECK(gazes_at(r.plan, "user"));

  const Trajectory base = plan_functional(c, t, config);
  const auto options = resolve_options(config, t, spec);
  const auto records = evaluate_candidates(c, t, resolve_goal(c, t), base, options, spec, config);
  double gaze_free = -1.0;
  for (const auto& rec : records) {
    std::vector<PrimitiveInstance> plan;
    for (std::size_t o : rec.plan) plan.push_back(options[o]);
    if (!gazes_at(plan, "user")) gaze_free = std::max(gaze_free, rec.expressive.E);
  }
  CHECK(r.report.E > gaze_free);
}

TEST_CASE("placeholders bind to the task and unbound entries are dropped") {
  PlannerConfig config = default_planner_config();
  const TaskSpec t = joint_task();
  ExpressionSpec spec = attention_only();
  auto options = resolve_options(config, t, spec);
  for (const auto& p : options) {
    const std::string target = p.text("target").value_or("");
    CHECK(target != kAttentionPlaceholder);
    CHECK(target != kGoalPlaceholder);
  }
  CHECK(std::none_of(options.begin(), options.end(), [](const auto& p) { return p.kind == K::Wag; }));

  spec.attention_target.reset();
  TaskSpec no_goal = t;
  no_goal.goal_target.reset();
  options = resolve_options(config, no_goal, spec);
  CHECK(std::none_of(options.begin(), options.end(), [](const auto& p) { return p.kind == K::OrientToward; }));
}

TEST_CASE("expressive plans dominate the baseline and keep F") {
  const ChainSpec c = default_chain();
  const TaskSpec t = joint_task();
  for (double g : {0.25, 1.0, 4.0}) {
    PlannerConfig config = default_planner_config();
    config.gamma = g;
    const PlanResult r = plan_expressive(c, t, config, mixed());
    const Trajectory base = plan_functional(c, t, config);
    const double base_F = functional_utility(base, resolve_goal(c, t));
    const auto base_E = expressive_utility(c, base, t.world, mixed(), goal_point(c, t), config.scoring);
    CHECK(r.report.F == base_F);
    CHECK(r.report.total >= base_F + g * base_E.E);
    CHECK(r.trajectory.terminal().q == base.terminal().q);
    CHECK(r.trajectory.terminal().tool == base.terminal().tool);
    CHECK(is_valid(c, r.trajectory));
    CHECK(r.trajectory.duration() <= t.horizon + 1e-9);
  }
}

TEST_CASE("a plan uses each option at most once") {
  const ChainSpec c = default_chain();
  PlannerConfig config = default_planner_config();
  config.gamma = 2.0;
  const PlanResult r = plan_expressive(c, joint_task(), config, mixed());
  for (std::size_t i = 0; i < r.plan.size(); ++i)
    for (std::size_t j = i + 1; j < r.plan.size(); ++j) CHECK_FALSE(r.plan[i] == r.plan[j]);
}

TEST_CASE("exhaustive sweep is monotone in gamma") {
  const ChainSpec c = default_chain();
  PlannerConfig config = default_planner_config();
  config.exhaustive = true;
  config.max_plan_length = 3;
  const TaskSpec t = joint_task();
  const Trajectory base = plan_functional(c, t, config);
  const std::vector<double> gammas{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  const auto rows = sweep(c, t, base, config, mixed(), gammas);
  REQUIRE(rows.size() == gammas.size());
  CHECK(rows.front().result.plan.empty());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].result.report.E >= rows[i - 1].result.report.E);
    CHECK(rows[i].result.report.F <= rows[i - 1].result.report.F);
    CHECK(rows[i].result.candidates == rows[0].result.candidates);
  }
}

TEST_CASE("sweep rejects empty and negative gamma lists") {
  const ChainSpec c = default_chain();
  const TaskSpec t = joint_task();
  const Trajectory base = plan_functional(c, t);
  CHECK_THROWS_AS(sweep(c, t, base, default_planner_config(), mixed(), {}), MotionError);
  CHECK_THROWS_AS(sweep(c, t, base, default_planner_config(), mixed(), {0.5, -1.0}), MotionError);
}

TEST_CASE("search is deterministic and thread count does not change the result") {
  const ChainSpec c = default_chain();
  PlannerConfig config = default_planner_config();
  config.gamma = 1.5;
  config.max_candidates = 40;
  config.seed = 17;
  const TaskSpec t = joint_task();
  const PlanResult a = plan_expressive(c, t, config, mixed());
  const PlanResult b = plan_expressive(c, t, config, mixed());
  config.threads = 4;
  const PlanResult p = plan_expressive(c, t, config, mixed());
  for (const auto* r : {&b, &p}) {
    CHECK(r->plan == a.plan);
    CHECK(r->trajectory == a.trajectory);
    CHECK(r->report.total == a.report.total);
    CHECK(r->candidates == a.candidates);
  }
  CHECK(a.candidates <= 40);
}

TEST_CASE("planner config validation") {
  PlannerConfig config = default_planner_config();
  SECTION("negative gamma") { config.gamma = -0.1; }
  SECTION("zero beam") { config.beam_width = 0; }
  SECTION("zero threads") { config.threads = 0; }
  SECTION("catalog kind without a grid") { config.catalog.push_back(K::Shake); }
  SECTION("grid entry of the wrong kind") { config.grids[K::Nod].push_back(make_primitive(K::Wag, {}, Anchor::post())); }
  try {
    config.validate();
    FAIL("expected InvalidConfig");
  } catch (const MotionError& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}
