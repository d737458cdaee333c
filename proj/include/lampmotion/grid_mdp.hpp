/**
 * @file grid_mdp.hpp
 * @brief Small enumerable MDP used to check the search strategy against exact
 * dynamic programming.
 *
 * Cells live on a 1-D or 2-D lattice. Each step the agent may stay or move one
 * cell along a dimension; moves past the border leave it in place. The reward
 * for occupying cell s is [s == goal] + gamma * e(s), collected at steps
 * 1..T (the start cell is not rewarded).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lampmotion/errors.hpp"

namespace lampmotion {

using GridCell = std::array<int, 2>;

struct GridMDP {
  std::vector<int> sizes;      ///< positions per dimension, 1 or 2 entries, each in [1, 15]
  int horizon = 1;             ///< T, number of actions, in [0, 30]
  GridCell start{0, 0};
  GridCell goal{0, 0};
  std::vector<double> scores;  ///< e(cell), row-major over sizes

  static constexpr int kMaxDims = 2;
  static constexpr int kMaxPositions = 15;
  static constexpr int kMaxHorizon = 30;

  std::size_t dims() const { return sizes.size(); }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int s : sizes) n *= static_cast<std::size_t>(s);
    return n;
  }

  std::size_t index(const GridCell& c) const {
    return dims() == 1 ? static_cast<std::size_t>(c[0])
                       : static_cast<std::size_t>(c[0]) * static_cast<std::size_t>(sizes[1]) +
                             static_cast<std::size_t>(c[1]);
  }

  GridCell cell(std::size_t idx) const {
    if (dims() == 1) return {static_cast<int>(idx), 0};
    const auto w = static_cast<std::size_t>(sizes[1]);
    return {static_cast<int>(idx / w), static_cast<int>(idx % w)};
  }

  bool inside(const GridCell& c) const {
    for (std::size_t d = 0; d < dims(); ++d)
      if (c[d] < 0 || c[d] >= sizes[d]) return false;
    for (std::size_t d = dims(); d < kMaxDims; ++d)
      if (c[d] != 0) return false;
    return true;
  }

  /// Actions in tie-break order: stay, then -/+ along each dimension.
  std::size_t action_count() const { return 1 + 2 * dims(); }

  GridCell step(const GridCell& c, std::size_t action) const {
    if (action == 0) return c;
    const std::size_t d = (action - 1) / 2;
    GridCell n = c;
    n[d] += (action % 2 == 1) ? -1 : 1;
    return inside(n) ? n : c;
  }

  double reward(const GridCell& c, double gamma) const {
    return (c == goal ? 1.0 : 0.0) + gamma * scores[index(c)];
  }

  int distance(const GridCell& a, const GridCell& b) const {
    return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
  }

  void validate() const {
    if (sizes.empty() || sizes.size() > kMaxDims) fail(ErrorCode::InvalidInput, "grid must have 1 or 2 dimensions");
    for (int s : sizes)
      if (s < 1 || s > kMaxPositions) fail(ErrorCode::InvalidInput, "grid dimension sizes must lie in [1, 15]");
    if (horizon < 0 || horizon > kMaxHorizon) fail(ErrorCode::InvalidInput, "grid horizon must lie in [0, 30]");
    if (!inside(start)) fail(ErrorCode::InvalidInput, "start cell lies outside the grid");
    if (!inside(goal)) fail(ErrorCode::InvalidInput, "goal cell lies outside the grid");
    if (scores.size() != cell_count()) fail(ErrorCode::InvalidInput, "score table size does not match the grid");
    for (double s : scores)
      if (!std::isfinite(s)) fail(ErrorCode::InvalidInput, "score table must be finite");
  }
};

struct GridPlan {
  double utility = 0.0;
  std::vector<GridCell> path;       ///< T + 1 cells, starting at the start cell
  std::vector<std::size_t> actions; ///< T action indices
};

/// Sums the rewards collected along a path (steps 1..T).
inline double path_utility(const GridMDP& mdp, const std::vector<GridCell>& path, double gamma) {
  double u = 0.0;
  for (std::size_t t = 1; t < path.size(); ++t) u += mdp.reward(path[t], gamma);
  return u;
}

/// Exact finite-horizon dynamic program. Among optimal paths the one with the
/// lexicographically smallest action sequence is returned.
inline GridPlan value_iteration(const GridMDP& mdp, double gamma) {
  mdp.validate();
  const std::size_t n = mdp.cell_count();
  const auto T = static_cast<std::size_t>(mdp.horizon);
  // value[t][s]: best reward collectable from steps t+1..T when at s at step t.
  std::vector<std::vector<double>> value(T + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::size_t>> best(T, std::vector<std::size_t>(n, 0));
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t s = 0; s < n; ++s) {
      const GridCell c = mdp.cell(s);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < mdp.action_count(); ++a) {
        const GridCell next = mdp.step(c, a);
        const double v = mdp.reward(next, gamma) + value[t + 1][mdp.index(next)];
        if (v > top) {
          top = v;
          best[t][s] = a;
        }
      }
      value[t][s] = top;
    }
  }
  GridPlan plan;
  plan.utility = value[0][mdp.index(mdp.start)];
  plan.path.push_back(mdp.start);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t a = best[t][mdp.index(plan.path.back())];
    plan.actions.push_back(a);
    plan.path.push_back(mdp.step(plan.path.back(), a));
  }
  return plan;
}

namespace detail {

/// bound[c][r]: optimistic reward over the next r steps from cell c. Step t can
/// reach at most the best cell within t moves, so summing those maxima never
/// underestimates what a path can collect.
inline std::vector<std::vector<double>> reach_bounds(const GridMDP& mdp, double gamma) {
  const std::size_t n = mdp.cell_count();
  const auto T = static_cast<std::size_t>(mdp.horizon);
  std::vector<std::vector<double>> bound(n, std::vector<double>(T + 1, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> within(T + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < n; ++s) {
      const auto d = static_cast<std::size_t>(mdp.distance(mdp.cell(c), mdp.cell(s)));
      if (d <= T) within[d] = std::max(within[d], mdp.reward(mdp.cell(s), gamma));
    }
    double best = within[0];
    for (std::size_t r = 1; r <= T; ++r) {
      best = std::max(best, within[r]);
      bound[c][r] = bound[c][r - 1] + best;
    }
  }
  return bound;
}

}  // namespace detail

/// Beam search over grid actions with one entry per cell and an optimistic
/// bound guiding which partial paths survive. A width of at least the number
/// of cells keeps every cell's best prefix, which makes the search exact.
inline GridPlan plan_on_grid(const GridMDP& mdp, double gamma, std::size_t beam_width) {
  mdp.validate();
  if (beam_width == 0) fail(ErrorCode::InvalidConfig, "beam width must be >= 1");
  const auto bound = detail::reach_bounds(mdp, gamma);

  struct Node {
    GridCell cell;
    double g = 0.0;
    double f = 0.0;
    std::vector<std::size_t> actions;
  };
  const auto better_prefix = [](const Node& a, const Node& b) {
    if (a.g != b.g) return a.g > b.g;
    return a.actions < b.actions;
  };
  const auto rank = [](const Node& a, const Node& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    return a.actions < b.actions;
  };

  std::vector<Node> beam{{mdp.start, 0.0, 0.0, {}}};
  const int T = mdp.horizon;
  for (int t = 0; t < T; ++t) {
    std::vector<std::int64_t> slot(mdp.cell_count(), -1);
    std::vector<Node> next;
    for (const auto& node : beam) {
      for (std::size_t a = 0; a < mdp.action_count(); ++a) {
        Node child;
        child.cell = mdp.step(node.cell, a);
        child.g = node.g + mdp.reward(child.cell, gamma);
        child.f = child.g + bound[mdp.index(child.cell)][static_cast<std::size_t>(T - t - 1)];
        child.actions = node.actions;
        child.actions.push_back(a);
        auto& s = slot[mdp.index(child.cell)];
        if (s < 0) {
          s = static_cast<std::int64_t>(next.size());
          next.push_back(std::move(child));
        } else if (better_prefix(child, next[static_cast<std::size_t>(s)])) {
          next[static_cast<std::size_t>(s)] = std::move(child);
        }
      }
    }
    std::sort(next.begin(), next.end(), rank);
    if (next.size() > beam_width) next.resize(beam_width);
    beam = std::move(next);
  }

  const Node& top = *std::min_element(beam.begin(), beam.end(), better_prefix);
  GridPlan plan;
  plan.utility = top.g;
  plan.actions = top.actions;
  plan.path.push_back(mdp.start);
  for (std::size_t a : plan.actions) plan.path.push_back(mdp.step(plan.path.back(), a));
  return plan;
}

}  // namespace lampmotion
