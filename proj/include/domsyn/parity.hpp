#pragma once

#include <algorithm>
#include <vector>

namespace domsyn {

/// Finite two-player game; player 0 wins a play when the largest color seen
/// infinitely often is even. Every node needs at least one successor.
struct ParityGame {
  std::vector<int> owner;  // 0 or 1
  std::vector<int> color;
  std::vector<std::vector<int>> succ;

  int add_node(int who, int c) {
    owner.push_back(who);
    color.push_back(c);
    succ.emplace_back();
    return static_cast<int>(owner.size()) - 1;
  }
  int size() const { return static_cast<int>(owner.size()); }
};

/// Winner per node and a positional strategy for each node's owner that wins
/// from every node in that owner's region (-1 where the owner loses).
struct ParitySolution {
  std::vector<int> winner;
  std::vector<int> strategy;
};

namespace detail {

class Zielonka {
 public:
  explicit Zielonka(const ParityGame& g) : g_(g), pred_(g.size()) {
    for (int v = 0; v < g.size(); ++v) {
      for (int w : g.succ[v]) pred_[w].push_back(v);
    }
  }

  ParitySolution solve() {
    const int n = g_.size();
    ParitySolution out{std::vector<int>(n, 0), std::vector<int>(n, -1)};
    std::vector<char> all(n, 1);
    auto [w0, w1] = run(all, out.strategy);
    for (int v = 0; v < n; ++v) {
      out.winner[v] = w1[v] ? 1 : 0;
      if (out.winner[v] != g_.owner[v]) out.strategy[v] = -1;
    }
    return out;
  }

 private:
  using Set = std::vector<char>;

  // Attractor of `target` for player p inside `arena`; records attracting
  // moves for p's nodes in `strategy`.
  Set attractor(const Set& arena, const Set& target, int p, std::vector<int>& strategy) const {
    const int n = g_.size();
    Set attr = target;
    std::vector<int> remaining(n, 0);
    for (int v = 0; v < n; ++v) {
      if (!arena[v]) continue;
      for (int w : g_.succ[v]) remaining[v] += arena[w] ? 1 : 0;
    }
    std::vector<int> queue;
    for (int v = 0; v < n; ++v) {
      if (attr[v]) queue.push_back(v);
    }
    while (!queue.empty()) {
      int w = queue.back();
      queue.pop_back();
      for (int v : pred_[w]) {
        if (!arena[v] || attr[v]) continue;
        if (g_.owner[v] == p) {
          attr[v] = 1;
          strategy[v] = w;
          queue.push_back(v);
        } else if (--remaining[v] == 0) {
          attr[v] = 1;
          queue.push_back(v);
        }
      }
    }
    return attr;
  }

  std::pair<Set, Set> run(const Set& arena, std::vector<int>& strategy) {
    const int n = g_.size();
    Set w0(n, 0), w1(n, 0);
    int top = -1;
    for (int v = 0; v < n; ++v) {
      if (arena[v]) top = std::max(top, g_.color[v]);
    }
    if (top < 0) return {w0, w1};
    const int p = top % 2;
    Set current = arena;
    for (;;) {
      Set target(n, 0);
      for (int v = 0; v < n; ++v) target[v] = current[v] && g_.color[v] == top;
      // Nodes of the top color owned by p move anywhere inside the arena.
      for (int v = 0; v < n; ++v) {
        if (!target[v] || g_.owner[v] != p) continue;
        for (int w : g_.succ[v]) {
          if (current[w]) {
            strategy[v] = w;
            break;
          }
        }
      }
      Set a = attractor(current, target, p, strategy);
      Set sub(n, 0);
      for (int v = 0; v < n; ++v) sub[v] = current[v] && !a[v];
      auto [s0, s1] = run(sub, strategy);
      Set& opp = p == 0 ? s1 : s0;
      bool opp_empty = std::none_of(opp.begin(), opp.end(), [](char c) { return c != 0; });
      if (opp_empty) {
        Set& mine = p == 0 ? w0 : w1;
        for (int v = 0; v < n; ++v) mine[v] = current[v];
        return {w0, w1};
      }
      Set b = attractor(current, opp, 1 - p, strategy);
      Set& theirs = p == 0 ? w1 : w0;
      for (int v = 0; v < n; ++v) {
        if (b[v]) theirs[v] = 1;
      }
      for (int v = 0; v < n; ++v) current[v] = current[v] && !b[v];
    }
  }

  const ParityGame& g_;
  std::vector<std::vector<int>> pred_;
};

}  // namespace detail

inline ParitySolution solve_parity(const ParityGame& g) { return detail::Zielonka(g).solve(); }

}  // namespace domsyn
