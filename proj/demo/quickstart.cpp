// Plans the function-driven and expression-driven versions of one scenario,
// prints their utilities, then plans a custom task with the expressive search.

#include <cstdio>

#include "lampmotion/io/serialization.hpp"
#include "lampmotion/planner.hpp"
#include "lampmotion/scenarios.hpp"

namespace lm = lampmotion;

int main() {
  const lm::ChainSpec chain = lm::default_chain();
  const lm::PlannerConfig config = lm::default_planner_config();

  // Built-in scenario: both variants share the goal, the E variant adds a scripted plan.
  const lm::ScenarioPair pair = lm::build_pair(chain, "remind_water", config);
  std::printf("remind_water  F: F=%g E=%.3f (%.2f s)\n", pair.report_F.F, pair.report_F.E, pair.traj_F.duration());
  std::printf("remind_water  E: F=%g E=%.3f (%.2f s)\n", pair.report_E.F, pair.report_E.E, pair.traj_E.duration());
  for (const auto& p : pair.plan_E) std::printf("  %s\n", lm::describe(p).c_str());
  for (const auto& c : pair.checks) std::printf("  %-18s %s\n", c.name.c_str(), c.ok ? "ok" : "FAILED");

  // Custom task: move the head over a book and look at the user on the way.
  lm::TaskSpec task;
  task.id = "point_at_book";
  task.start << 0, -0.1, 0.2, 0, 0.5, 0;
  task.goal = lm::TaskPoseGoal{lm::Vec3(0.30, -0.15, 0.22), std::string("book"), std::nullopt};
  task.goal_tool.light_on = true;
  task.goal_tool.light_intensity = 0.8;
  task.world.user_position = lm::Vec3(0.6, 0.45, 0.40);
  task.world.objects["book"] = lm::Vec3(0.35, -0.2, 0.0);

  lm::ExpressionSpec spec;
  spec.weights.attention = 1.0;
  spec.weights.intention = 0.5;
  spec.attention_target = "user";

  lm::PlannerConfig search = config;
  search.gamma = 1.0;
  const lm::PlanResult r = lm::plan_expressive(chain, task, search, spec);
  std::printf("\npoint_at_book: total=%.3f (F=%g, E=%.3f) from %zu candidates\n", r.report.total, r.report.F,
              r.report.E, r.candidates);
  for (const auto& p : r.plan) std::printf("  %s\n", lm::describe(p).c_str());

  const lm::io::TrajectoryHeader header{chain.id, task.id, "E", "searched", search.gamma, search.seed};
  const std::string doc = lm::io::trajectory_text(r.trajectory, header);
  std::printf("trajectory document: %zu samples, %zu bytes\n", r.trajectory.size(), doc.size());
  return pair.ok() ? 0 : 1;
}
