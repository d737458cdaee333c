/**
 * @file planner.hpp
 * @brief Function-driven baseline and expression-driven search over primitive plans.
 *
 * The search layers primitives on top of the functional baseline and keeps the
 * argmax of F + gamma * E. Candidates are ranked by total (descending), then
 * duration (ascending), then plan order, so equal totals resolve to the
 * shortest and simplest plan; the empty plan is the baseline itself.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "lampmotion/errors.hpp"
#include "lampmotion/grid_mdp.hpp"
#include "lampmotion/kinematics.hpp"
#include "lampmotion/primitives.hpp"
#include "lampmotion/task.hpp"
#include "lampmotion/trajectory.hpp"
#include "lampmotion/utility.hpp"

namespace lampmotion {

/// Placeholder targets a grid entry may use; resolved per task.
inline constexpr std::string_view kAttentionPlaceholder = "@attention";
inline constexpr std::string_view kGoalPlaceholder = "@goal";

struct PlannerConfig {
  double gamma = 1.0;
  std::vector<PrimitiveKind> catalog;
  std::map<PrimitiveKind, std::vector<PrimitiveInstance>> grids;
  std::size_t beam_width = 8;
  std::uint64_t seed = 0;
  std::size_t max_candidates = 20000;
  std::size_t max_plan_length = 4;
  bool exhaustive = false;
  unsigned threads = 1;
  TrajectorySettings trajectory;
  ScoringConfig scoring;
  PrimitiveDefaults primitives;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail(ErrorCode::InvalidConfig, "gamma must be a finite value >= 0");
    if (beam_width < 1) fail(ErrorCode::InvalidConfig, "beam width must be >= 1");
    if (max_candidates < 1) fail(ErrorCode::InvalidConfig, "max candidates must be >= 1");
    if (threads < 1) fail(ErrorCode::InvalidConfig, "thread count must be >= 1");
    if (!(trajectory.dt > 0.0)) fail(ErrorCode::InvalidConfig, "dt must be positive");
    for (auto kind : catalog) {
      auto it = grids.find(kind);
      if (it == grids.end() || it->second.empty())
        fail(ErrorCode::InvalidConfig, "no parameter grid for catalog kind " + std::string(to_string(kind)));
      for (const auto& p : it->second)
        if (p.kind != kind)
          fail(ErrorCode::InvalidConfig, "grid entry " + describe(p) + " listed under " + std::string(to_string(kind)));
    }
  }
};

inline PrimitiveInstance make_primitive(PrimitiveKind kind, ParamMap params, Anchor anchor) {
  return PrimitiveInstance{kind, std::move(params), anchor};
}

/// Desk-scale catalog: gaze, gesture, proxemic and temporal primitives with one
/// or two settings each.
inline PlannerConfig default_planner_config() {
  using K = PrimitiveKind;
  const std::string attention(kAttentionPlaceholder);
  const std::string goal(kGoalPlaceholder);
  PlannerConfig c;
  c.catalog = {K::OrientToward, K::Nod, K::Lean, K::PauseInsert, K::LightEmphasis, K::Wag};
  c.grids[K::OrientToward] = {
      make_primitive(K::OrientToward, {{"target", attention}, {"duration", 1.2}}, Anchor::pre()),
      make_primitive(K::OrientToward, {{"target", attention}, {"duration", 1.2}}, Anchor::terminal_minus()),
      make_primitive(K::OrientToward, {{"target", goal}, {"duration", 1.0}}, Anchor::pre()),
  };
  c.grids[K::Nod] = {make_primitive(K::Nod, {{"amplitude", 0.2}}, Anchor::terminal_minus())};
  c.grids[K::Lean] = {make_primitive(K::Lean, {{"amplitude", 0.15}}, Anchor::post())};
  c.grids[K::PauseInsert] = {make_primitive(K::PauseInsert, {{"duration", 0.6}}, Anchor::pre())};
  c.grids[K::LightEmphasis] = {make_primitive(K::LightEmphasis, {{"duration", 0.8}}, Anchor::terminal_minus())};
  c.grids[K::Wag] = {make_primitive(K::Wag, {{"amplitude", 0.3}, {"beat_sync", 1.0}}, Anchor::terminal_minus())};
  return c;
}

/// Function-driven result: the baseline trajectory or, when the goal cannot be
/// reached, an attempt that ends at the closest configuration found.
class TaskUnreachableError : public UnreachableError {
 public:
  TaskUnreachableError(const std::string& what, JointVector best_effort, double residual, Trajectory attempt)
      : UnreachableError(what, std::move(best_effort), residual), attempt_(std::move(attempt)) {}
  const Trajectory& attempt() const noexcept { return attempt_; }

 private:
  Trajectory attempt_;
};

namespace detail {

inline Trajectory functional_motion(const ChainSpec& chain, const TaskSpec& task, const JointVector& target,
                                    const TrajectorySettings& settings) {
  const JointVector start = clamp_to_limits(chain, task.start);
  Trajectory traj = interpolate(chain, start, target, settings.dt, 1.0, settings.ramp_time);
  for (auto& s : traj.samples) s.tool = task.start_tool;
  if (!(traj.terminal().tool == task.goal_tool)) traj.samples.push_back({target, task.goal_tool});
  return traj;
}

}  // namespace detail

/// Shortest feasible move from the start to the goal state: a trapezoidal
/// joint-space interpolation followed by the goal tool event.
inline Trajectory plan_functional(const ChainSpec& chain, const TaskSpec& task, const PlannerConfig& config = {}) {
  task.validate();
  const ResolvedGoal goal = resolve_goal(chain, task);
  if (!goal.q) {
    const JointVector limit_pose = *goal.best_effort;
    Trajectory attempt = detail::functional_motion(chain, task, limit_pose, config.trajectory);
    const auto& pg = std::get<TaskPoseGoal>(task.goal);
    const double residual = (forward_kinematics(chain, limit_pose).position - pg.position).norm();
    throw TaskUnreachableError("goal of task '" + task.id + "' is out of reach", limit_pose, residual,
                               std::move(attempt));
  }
  Trajectory traj = detail::functional_motion(chain, task, *goal.q, config.trajectory);
  if (traj.duration() > task.horizon + 1e-9)
    fail(ErrorCode::Infeasible, "functional motion of task '" + task.id + "' exceeds the horizon");
  return traj;
}

/// Search outcome: chosen plan, its trajectory and utility report.
struct PlanResult {
  Trajectory trajectory;
  UtilityReport report;
  std::vector<PrimitiveInstance> plan;
  std::size_t candidates = 0;  ///< candidates evaluated, baseline included
};

/// Scores of one evaluated candidate, independent of gamma.
struct CandidateRecord {
  std::vector<std::size_t> plan;  ///< option indices
  double F = 0.0;
  ExpressiveResult expressive;
  double duration = 0.0;

  double total(double gamma) const { return F + gamma * expressive.E; }
};

/// Strict ordering of candidates: higher total, then shorter, then plan order.
inline bool ranks_before(const CandidateRecord& a, const CandidateRecord& b, double gamma) {
  const double ta = a.total(gamma), tb = b.total(gamma);
  if (ta != tb) return ta > tb;
  if (a.duration != b.duration) return a.duration < b.duration;
  return a.plan < b.plan;
}

/// Catalog entries with placeholders bound to this task. Entries whose target
/// cannot be bound are dropped.
inline std::vector<PrimitiveInstance> resolve_options(const PlannerConfig& config, const TaskSpec& task,
                                                      const ExpressionSpec& spec) {
  std::optional<std::string> goal_name = task.goal_target;
  if (!goal_name)
    if (const auto* pg = std::get_if<TaskPoseGoal>(&task.goal)) goal_name = pg->look_at;

  std::vector<PrimitiveInstance> out;
  for (auto kind : config.catalog) {
    for (auto p : config.grids.at(kind)) {
      bool bound = true;
      for (auto& [key, value] : p.params) {
        const auto* s = std::get_if<std::string>(&value);
        if (!s) continue;
        if (*s == kAttentionPlaceholder) {
          if (spec.attention_target) value = *spec.attention_target;
          else bound = false;
        } else if (*s == kGoalPlaceholder) {
          if (goal_name) value = *goal_name;
          else bound = false;
        }
      }
      if (p.number("beat_sync", 0.0) != 0.0 && task.world.beat_times.empty()) bound = false;
      if (bound && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
  }
  return out;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct Node {
  std::vector<std::size_t> plan;
  Trajectory traj;
};

}  // namespace detail

/// Evaluates the search space on top of `base`. A plan uses each catalog entry
/// at most once. With `exhaustive` every plan up to the length cap is scored; otherwise only the best `beam_width`
/// prefixes at each length (ranked at `config.gamma`) are extended.
inline std::vector<CandidateRecord> evaluate_candidates(const ChainSpec& chain, const TaskSpec& task,
                                                        const ResolvedGoal& goal, const Trajectory& base,
                                                        const std::vector<PrimitiveInstance>& options,
                                                        const ExpressionSpec& spec, const PlannerConfig& config) {
  const std::optional<Vec3> intention_point = goal_point(chain, task);
  const auto score = [&](std::vector<std::size_t> plan, const Trajectory& traj) {
    CandidateRecord r;
    r.plan = std::move(plan);
    r.F = functional_utility(traj, goal);
    r.expressive = expressive_utility(chain, traj, task.world, spec, intention_point, config.scoring);
    r.duration = traj.duration();
    return r;
  };

  std::vector<CandidateRecord> records{score({}, base)};
  const double base_F = records.front().F;
  std::vector<detail::Node> frontier{{{}, base}};
  std::size_t budget = config.max_candidates - 1;
  std::mt19937_64 rng(config.seed);

  for (std::size_t length = 1; length <= config.max_plan_length && budget > 0 && !frontier.empty(); ++length) {
    std::vector<std::pair<std::size_t, std::size_t>> expansions;  // (frontier index, option index)
    for (std::size_t n = 0; n < frontier.size(); ++n)
      for (std::size_t o = 0; o < options.size(); ++o)
        if (std::find(frontier[n].plan.begin(), frontier[n].plan.end(), o) == frontier[n].plan.end())
          expansions.emplace_back(n, o);
    if (expansions.size() > budget) {
      std::shuffle(expansions.begin(), expansions.end(), rng);
      expansions.resize(budget);
      std::sort(expansions.begin(), expansions.end());
    }
    budget -= expansions.size();

    std::vector<std::optional<Trajectory>> trajs(expansions.size());
    std::vector<std::optional<CandidateRecord>> scored(expansions.size());
    detail::parallel_for(expansions.size(), config.threads, [&](std::size_t i) {
      const auto& [n, o] = expansions[i];
      std::vector<std::size_t> plan = frontier[n].plan;
      plan.push_back(o);
      try {
        Trajectory t = apply_primitive(chain, frontier[n].traj, options[o], task.world, config.primitives);
        if (t.duration() > task.horizon + 1e-9) return;
        CandidateRecord r = score(std::move(plan), t);
        // Expression is layered on the functional motion, never traded against it.
        if (r.F != base_F) return;
        scored[i] = std::move(r);
        trajs[i] = std::move(t);
      } catch (const MotionError&) {
        // Primitive does not fit this prefix; the candidate is skipped.
      }
    });

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < expansions.size(); ++i)
      if (scored[i]) kept.push_back(i);
    std::sort(kept.begin(), kept.end(),
              [&](std::size_t a, std::size_t b) { return ranks_before(*scored[a], *scored[b], config.gamma); });
    if (!config.exhaustive && kept.size() > config.beam_width) {
      std::vector<std::size_t> survivors(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(config.beam_width));
      for (std::size_t i : kept) records.push_back(*scored[i]);
      kept = std::move(survivors);
    } else {
      for (std::size_t i : kept) records.push_back(*scored[i]);
    }
    std::vector<detail::Node> next;
    if (length < config.max_plan_length) {
      next.reserve(kept.size());
      for (std::size_t i : kept) next.push_back({scored[i]->plan, std::move(*trajs[i])});
    }
    frontier = std::move(next);
  }
  return records;
}

inline std::size_t select_candidate(const std::vector<CandidateRecord>& records, double gamma) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (ranks_before(records[i], records[best], gamma)) best = i;
  return best;
}

inline PlanResult realize(const ChainSpec& chain, const TaskSpec& task, const Trajectory& base,
                          const std::vector<PrimitiveInstance>& options, const CandidateRecord& record, double gamma,
                          std::size_t candidates, const PlannerConfig& config) {
  PlanResult r;
  for (std::size_t o : record.plan) r.plan.push_back(options[o]);
  r.trajectory = compose(chain, base, r.plan, task.world, config.primitives);
  r.report = make_report(record.F, record.expressive, gamma);
  r.candidates = candidates;
  return r;
}

/// Searches primitive plans layered on `base`, which must end at the task's goal
/// state (or at the best-effort pose for unreachable goals).
inline PlanResult search_expressive(const ChainSpec& chain, const TaskSpec& task, const Trajectory& base,
                                    const PlannerConfig& config, const ExpressionSpec& spec) {
  config.validate();
  spec.validate();
  const ResolvedGoal goal = resolve_goal(chain, task);
  const auto options = resolve_options(config, task, spec);
  const auto records = evaluate_candidates(chain, task, goal, base, options, spec, config);
  const auto& best = records[select_candidate(records, config.gamma)];
  return realize(chain, task, base, options, best, config.gamma, records.size(), config);
}

/// Expression-driven plan: argmax of F + gamma * E over primitive plans on top
/// of the functional baseline. gamma = 0 returns the baseline itself.
inline PlanResult plan_expressive(const ChainSpec& chain, const TaskSpec& task, const PlannerConfig& config,
                                  const ExpressionSpec& spec) {
  config.validate();
  return search_expressive(chain, task, plan_functional(chain, task, config), config, spec);
}

struct SweepRow {
  double gamma = 0.0;
  PlanResult result;
};

/// Plans at each gamma. Exhaustive search scores the candidate set once and
/// reuses it for every gamma.
inline std::vector<SweepRow> sweep(const ChainSpec& chain, const TaskSpec& task, const Trajectory& base,
                                   const PlannerConfig& config, const ExpressionSpec& spec,
                                   const std::vector<double>& gammas) {
  if (gammas.empty()) fail(ErrorCode::InvalidInput, "sweep needs at least one gamma");
  for (double g : gammas)
    if (!(g >= 0.0) || !std::isfinite(g)) fail(ErrorCode::InvalidInput, "sweep gammas must be finite values >= 0");
  config.validate();
  spec.validate();
  std::vector<SweepRow> rows;
  if (config.exhaustive) {
    const ResolvedGoal goal = resolve_goal(chain, task);
    const auto options = resolve_options(config, task, spec);
    const auto records = evaluate_candidates(chain, task, goal, base, options, spec, config);
    for (double g : gammas)
      rows.push_back({g, realize(chain, task, base, options, records[select_candidate(records, g)], g, records.size(),
                                 config)});
    return rows;
  }
  for (double g : gammas) {
    PlannerConfig c = config;
    c.gamma = g;
    rows.push_back({g, search_expressive(chain, task, base, c, spec)});
  }
  return rows;
}

/// Grid counterpart of the plan search, using the configured beam width.
inline GridPlan plan_on_grid(const GridMDP& mdp, double gamma, const PlannerConfig& config) {
  return plan_on_grid(mdp, gamma, config.exhaustive ? mdp.cell_count() : config.beam_width);
}

}  // namespace lampmotion
