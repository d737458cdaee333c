// Brute force over every action sequence of a small grid MDP. Written against
// the model's rules directly: stay or move one cell per dimension, clamped at
// the border; reward [cell == goal] + gamma * score(cell) at steps 1..T.
#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

struct Grid {
  std::vector<int> sizes;
  int horizon = 0;
  int start[2] = {0, 0};
  int goal[2] = {0, 0};
  std::vector<double> scores;
};

struct Enumerated {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> actions;  // first maximizing sequence in lexicographic order
  std::size_t sequences = 0;
};

inline double cell_reward(const Grid& g, const int c[2], double gamma) {
  const bool at_goal = c[0] == g.goal[0] && c[1] == g.goal[1];
  const std::size_t idx = g.sizes.size() == 1 ? static_cast<std::size_t>(c[0])
                                              : static_cast<std::size_t>(c[0] * g.sizes[1] + c[1]);
  return (at_goal ? 1.0 : 0.0) + gamma * g.scores[idx];
}

inline void move(const Grid& g, int c[2], int action) {
  if (action == 0) return;
  const int d = (action - 1) / 2;
  const int next = c[d] + ((action % 2 == 1) ? -1 : 1);
  if (next >= 0 && next < g.sizes[static_cast<std::size_t>(d)]) c[d] = next;
}

inline double sequence_utility(const Grid& g, const std::vector<int>& actions, double gamma) {
  int c[2] = {g.start[0], g.start[1]};
  double u = 0.0;
  for (int a : actions) {
    move(g, c, a);
    u += cell_reward(g, c, gamma);
  }
  return u;
}

inline Enumerated enumerate(const Grid& g, double gamma) {
  const int branching = 1 + 2 * static_cast<int>(g.sizes.size());
  Enumerated out;
  std::vector<int> seq(static_cast<std::size_t>(g.horizon), 0);
  while (true) {
    ++out.sequences;
    const double u = sequence_utility(g, seq, gamma);
    if (u > out.best) {
      out.best = u;
      out.actions = seq;
    }
    // Odometer increment, last position fastest, so sequences come in lexicographic order.
    int pos = g.horizon - 1;
    while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == branching - 1) seq[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++seq[static_cast<std::size_t>(pos)];
  }
  return out;
}

}  // namespace oracle
