#pragma once

#include <bit>
#include <cstdint>
#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "domsyn/lasso.hpp"

namespace domsyn {

/// Conjunction of literals: `pos` variables true, `neg` variables false.
struct Cube {
  VarSet pos = 0;
  VarSet neg = 0;

  bool holds(Valuation v) const { return (v & pos) == pos && (v & neg) == 0; }
  bool consistent() const { return (pos & neg) == 0; }
  VarSet vars() const { return pos | neg; }
  /// Every valuation satisfying *this satisfies `other`.
  bool implies(const Cube& other) const {
    return subset_of(other.pos, pos) && subset_of(other.neg, neg);
  }
  Cube operator&(const Cube& o) const { return {pos | o.pos, neg | o.neg}; }
  /// Existential quantification of everything outside `keep`.
  Cube restricted(VarSet keep) const { return {pos & keep, neg & keep}; }

  /// The cube fixing exactly the letter `v` on `vars`.
  static Cube letter(Valuation v, VarSet vars) { return {v & vars, vars & ~v}; }

  friend bool operator==(const Cube&, const Cube&) = default;
  friend auto operator<=>(const Cube&, const Cube&) = default;
};

inline std::string format_cube(const Universe& u, const Cube& c) {
  if (c.pos == 0 && c.neg == 0) return "true";
  std::string out;
  for (int i = 0; i < u.size(); ++i) {
    if (!(c.vars() & bit(i))) continue;
    if (!out.empty()) out += " & ";
    if (c.neg & bit(i)) out += "!";
    out += u.name(i);
  }
  return out;
}

struct Edge {
  Cube guard;
  int dst = 0;
};

/// Nondeterministic Büchi word automaton with cube-guarded edges over
/// valuations. Immutable once built by the functions in this header.
struct BuchiAutomaton {
  VarSet alphabet = 0;
  std::vector<std::vector<Edge>> edges;  // per source state
  std::vector<int> initial;
  std::vector<char> accepting;

  int size() const { return static_cast<int>(edges.size()); }

  int add_state(bool acc) {
    edges.emplace_back();
    accepting.push_back(acc);
    return size() - 1;
  }

  void add_edge(int src, Cube guard, int dst) {
    if (!guard.consistent()) return;
    auto& out = edges[src];
    for (auto& e : out) {
      if (e.dst != dst) continue;
      if (guard.implies(e.guard)) return;
      if (e.guard.implies(guard)) {
        e.guard = guard;
        return;
      }
    }
    out.push_back({guard, dst});
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& es : edges) n += es.size();
    return n;
  }
};

/// Single accepting state with a true self-loop.
inline BuchiAutomaton accept_all(VarSet alphabet = 0) {
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.add_state(true);
  a.add_edge(0, Cube{}, 0);
  a.initial = {0};
  return a;
}

inline BuchiAutomaton empty_language(VarSet alphabet = 0) {
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.add_state(false);
  a.initial = {0};
  return a;
}

/// Automaton accepting exactly the word `w` restricted to `vars`.
inline BuchiAutomaton lasso_automaton(const Lasso& w, VarSet vars) {
  BuchiAutomaton a;
  a.alphabet = vars;
  const int n = static_cast<int>(w.positions());
  for (int i = 0; i < n; ++i) a.add_state(i == static_cast<int>(w.stem.size()));
  for (int i = 0; i < n; ++i) {
    a.add_edge(i, Cube::letter(w.at(i), vars), static_cast<int>(w.next(i)));
  }
  a.initial = {0};
  return a;
}

/// Textual dump, one transition per line `src -- guard --> dst`; accepting
/// states are flagged with `*` and initial states with `>`.
inline std::string dump(const Universe& u, const BuchiAutomaton& a) {
  std::string out;
  for (int q = 0; q < a.size(); ++q) {
    bool init = std::find(a.initial.begin(), a.initial.end(), q) != a.initial.end();
    out += (init ? ">" : " ");
    out += std::to_string(q) + (a.accepting[q] ? "*" : "") + "\n";
    for (const auto& e : a.edges[q]) {
      out += "  " + std::to_string(q) + " -- " + format_cube(u, e.guard) + " --> " +
             std::to_string(e.dst) + "\n";
    }
  }
  return out;
}

/// Product states of a binary construction map back to operand states.
struct Origin {
  int left = -1;
  int right = -1;
};

namespace detail {

// Tarjan SCCs; returns component id per node (reverse topological order).
template <typename Succ>
std::vector<int> scc(int n, Succ&& succ) {
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  struct Frame {
    int v;
    std::vector<int> next;
    std::size_t i;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, succ(root), 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& fr = call.back();
      if (fr.i < fr.next.size()) {
        int w = fr.next[fr.i++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, succ(w), 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
        continue;
      }
      int v = fr.v;
      if (low[v] == index[v]) {
        for (;;) {
          int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comp;
}

// A reachable accepting node on a cycle, as (stem path, cycle path) of node
// ids; stem ends where the cycle starts. Paths are BFS-shortest.
template <typename Succ>
std::optional<std::pair<std::vector<int>, std::vector<int>>> accepting_lasso(
    int n, const std::vector<int>& initial, Succ&& succ, const std::vector<char>& accepting) {
  std::vector<std::vector<int>> adj(n);
  for (int v = 0; v < n; ++v) adj[v] = succ(v);
  auto comp = scc(n, [&](int v) { return adj[v]; });
  std::vector<int> comp_size(n, 0);
  for (int v = 0; v < n; ++v) ++comp_size[comp[v]];
  auto on_cycle = [&](int v) {
    if (comp_size[comp[v]] > 1) return true;
    return std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
  };
  // BFS from initial states; first accepting cyclic node found is closest.
  std::vector<int> parent(n, -2);
  std::deque<int> queue;
  for (int q : initial) {
    if (parent[q] == -2) {
      parent[q] = -1;
      queue.push_back(q);
    }
  }
  int target = -1;
  while (!queue.empty() && target < 0) {
    int v = queue.front();
    queue.pop_front();
    if (accepting[v] && on_cycle(v)) {
      target = v;
      break;
    }
    for (int w : adj[v]) {
      if (parent[w] == -2) {
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  if (target < 0) return std::nullopt;
  std::vector<int> stem;
  for (int v = target; v != -1; v = parent[v]) stem.push_back(v);
  std::reverse(stem.begin(), stem.end());
  // Shortest cycle target -> ... -> target inside its SCC.
  std::vector<int> back(n, -2);
  queue.clear();
  back[target] = -1;
  queue.push_back(target);
  int last = -1;
  while (!queue.empty() && last < 0) {
    int v = queue.front();
    queue.pop_front();
    for (int w : adj[v]) {
      if (w == target) {
        last = v;
        break;
      }
      if (back[w] == -2 && comp[w] == comp[target]) {
        back[w] = v;
        queue.push_back(w);
      }
    }
  }
  std::vector<int> cycle;
  for (int v = last; v != -1; v = back[v]) cycle.push_back(v);
  std::reverse(cycle.begin(), cycle.end());
  stem.pop_back();  // target opens the cycle
  return std::make_pair(stem, cycle);
}

}  // namespace detail

/// Witness of nonemptiness. states[i] is the automaton state that reads
/// letter i of the lasso (stem states first, then loop states).
struct LassoWitness {
  Lasso lasso;
  std::vector<int> stem_states;
  std::vector<int> loop_states;
};

/// Emptiness via accepting SCC search. Letters of the witness assign each
/// variable of the edge guard and leave the rest false.
inline std::optional<LassoWitness> find_accepted_lasso(const BuchiAutomaton& a) {
  // Nodes are edges of the automaton so that letters come from the guards
  // actually taken: node = (state, edge index), encoded via offsets.
  const int n = a.size();
  std::vector<int> offset(n + 1, 0);
  for (int q = 0; q < n; ++q) offset[q + 1] = offset[q] + static_cast<int>(a.edges[q].size());
  const int m = offset[n];
  std::vector<int> src(m);
  for (int q = 0; q < n; ++q) {
    for (int k = offset[q]; k < offset[q + 1]; ++k) src[k] = q;
  }
  // Edge-node k (q --e--> d) precedes every edge-node leaving d.
  auto succ = [&](int k) {
    const Edge& e = a.edges[src[k]][k - offset[src[k]]];
    std::vector<int> out;
    for (int j = offset[e.dst]; j < offset[e.dst + 1]; ++j) out.push_back(j);
    return out;
  };
  std::vector<int> init;
  for (int q : a.initial) {
    for (int j = offset[q]; j < offset[q + 1]; ++j) init.push_back(j);
  }
  std::vector<char> acc(m, 0);
  for (int k = 0; k < m; ++k) acc[k] = a.accepting[src[k]];
  auto found = detail::accepting_lasso(m, init, succ, acc);
  if (!found) return std::nullopt;
  LassoWitness w;
  auto letter_of = [&](int k) { return a.edges[src[k]][k - offset[src[k]]].guard.pos; };
  for (int k : found->first) {
    w.lasso.stem.push_back(letter_of(k));
    w.stem_states.push_back(src[k]);
  }
  for (int k : found->second) {
    w.lasso.loop.push_back(letter_of(k));
    w.loop_states.push_back(src[k]);
  }
  return w;
}

/// Empty iff no accepted lasso exists; otherwise returns one.
inline std::optional<LassoWitness> is_empty(const BuchiAutomaton& a) { return find_accepted_lasso(a); }

/// Membership of stem·loop^ω, decided on the product of the automaton with
/// the lasso's position graph.
namespace detail {

// Membership for automata with at most 64 states: per-position state sets,
// with successor masks precomputed for a fixed set of letters.
class SmallRunner {
 public:
  SmallRunner(const BuchiAutomaton& a, std::vector<Valuation> letters) : a_(a), letters_(std::move(letters)) {
    std::sort(letters_.begin(), letters_.end());
    letters_.erase(std::unique(letters_.begin(), letters_.end()), letters_.end());
    const std::size_t k = static_cast<std::size_t>(a.size());
    succ_.assign(letters_.size() * k, 0);
    for (std::size_t l = 0; l < letters_.size(); ++l) {
      for (std::size_t q = 0; q < k; ++q) {
        for (const auto& e : a.edges[q]) {
          if (e.guard.holds(letters_[l])) succ_[l * k + q] |= std::uint64_t{1} << e.dst;
        }
      }
    }
    for (int q = 0; q < a.size(); ++q) {
      if (a.accepting[q]) acc_ |= std::uint64_t{1} << q;
    }
    for (int q : a.initial) init_ |= std::uint64_t{1} << q;
  }

  bool run(const Lasso& w) const {
    const std::size_t k = static_cast<std::size_t>(a_.size());
    auto table = [&](Valuation v) {
      auto it = std::lower_bound(letters_.begin(), letters_.end(), v);
      return &succ_[static_cast<std::size_t>(it - letters_.begin()) * k];
    };
    auto post = [](const std::uint64_t* t, std::uint64_t m) {
      std::uint64_t out = 0;
      for (; m; m &= m - 1) out |= t[std::countr_zero(m)];
      return out;
    };
    auto& loop = loop_;
    loop.clear();
    for (Valuation v : w.loop) loop.push_back(table(v));

    // One traversal of the loop from each state: where it can end (m) and
    // where it can end after visiting an accepting state (m_acc).
    auto& m = m_;
    auto& m_acc = m_acc_;
    m.assign(k, 0);
    m_acc.assign(k, 0);
    for (std::size_t q = 0; q < k; ++q) {
      std::uint64_t plain = std::uint64_t{1} << q, hit = 0;
      for (const auto* t : loop) {
        hit |= plain & acc_;
        plain &= ~acc_;
        plain = post(t, plain);
        hit = post(t, hit);
        plain &= ~hit;
      }
      m[q] = plain | hit;
      m_acc[q] = hit;
    }
    auto image = [&](const std::vector<std::uint64_t>& rel, std::uint64_t set) {
      std::uint64_t out = 0;
      for (; set; set &= set - 1) out |= rel[std::countr_zero(set)];
      return out;
    };
    auto star = [&](std::uint64_t set) {
      for (std::uint64_t more = set; more;) {
        const std::uint64_t next = image(m, more) & ~set;
        set |= next;
        more = next;
      }
      return set;
    };

    std::uint64_t start = init_;
    for (Valuation v : w.stem) start = post(table(v), start);
    for (std::uint64_t r = star(start); r; r &= r - 1) {
      const std::uint64_t q = std::uint64_t{1} << std::countr_zero(r);
      if (star(image(m_acc, star(q))) & q) return true;
    }
    return false;
  }

 private:
  const BuchiAutomaton& a_;
  std::vector<Valuation> letters_;
  std::vector<std::uint64_t> succ_;  // [letter][state]
  std::uint64_t acc_ = 0, init_ = 0;
  // Scratch space for run().
  mutable std::vector<const std::uint64_t*> loop_;
  mutable std::vector<std::uint64_t> m_, m_acc_;
};

inline std::vector<Valuation> letters_of(const Lasso& w) {
  std::vector<Valuation> out(w.stem);
  out.insert(out.end(), w.loop.begin(), w.loop.end());
  return out;
}

inline bool accepts_large(const BuchiAutomaton& a, const Lasso& w);

}  // namespace detail

inline bool accepts(const BuchiAutomaton& a, const Lasso& w) {
  if (a.size() <= 64) return detail::SmallRunner(a, detail::letters_of(w)).run(w);
  return detail::accepts_large(a, w);
}

/// accepts() for many lassos against one automaton.
inline std::vector<char> accepts_each(const BuchiAutomaton& a, const std::vector<Lasso>& words) {
  std::vector<char> out;
  out.reserve(words.size());
  if (a.size() > 64) {
    for (const auto& w : words) out.push_back(detail::accepts_large(a, w));
    return out;
  }
  std::set<Valuation> letters;
  for (const auto& w : words) {
    letters.insert(w.stem.begin(), w.stem.end());
    letters.insert(w.loop.begin(), w.loop.end());
  }
  detail::SmallRunner runner(a, {letters.begin(), letters.end()});
  for (const auto& w : words) out.push_back(runner.run(w));
  return out;
}

namespace detail {

inline bool accepts_large(const BuchiAutomaton& a, const Lasso& w) {
  const int positions = static_cast<int>(w.positions());
  const int n = a.size() * positions;
  // Product graph (state, position) in CSR form. Buffers are reused across
  // calls on the same thread.
  thread_local std::vector<int> start, adj, stack, mark;
  thread_local std::vector<char> reached;
  start.assign(static_cast<std::size_t>(n) + 1, 0);
  adj.clear();
  for (int q = 0; q < a.size(); ++q) {
    for (int i = 0; i < positions; ++i) {
      const Valuation letter = w.at(static_cast<std::size_t>(i));
      const int j = static_cast<int>(w.next(static_cast<std::size_t>(i)));
      for (const auto& e : a.edges[q]) {
        if (e.guard.holds(letter)) adj.push_back(e.dst * positions + j);
      }
      start[static_cast<std::size_t>(q * positions + i) + 1] = static_cast<int>(adj.size());
    }
  }
  reached.assign(static_cast<std::size_t>(n), 0);
  stack.clear();
  for (int q : a.initial) {
    if (!reached[q * positions]) {
      reached[q * positions] = 1;
      stack.push_back(q * positions);
    }
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int k = start[v]; k < start[v + 1]; ++k) {
      if (!reached[adj[k]]) {
        reached[adj[k]] = 1;
        stack.push_back(adj[k]);
      }
    }
  }
  // Some reachable accepting node lies on a cycle.
  mark.assign(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    if (!reached[v] || !a.accepting[v / positions]) continue;
    stack.assign(adj.begin() + start[v], adj.begin() + start[v + 1]);
    for (int u : stack) mark[u] = v;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (x == v) return true;
      for (int k = start[x]; k < start[x + 1]; ++k) {
        if (mark[adj[k]] != v) {
          mark[adj[k]] = v;
          stack.push_back(adj[k]);
        }
      }
    }
  }
  return false;
}

}  // namespace detail

/// Intersection by the two-phase flag construction: the flag waits for an
/// accepting state of `a`, then for one of `b`.
inline BuchiAutomaton product(const BuchiAutomaton& a, const BuchiAutomaton& b,
                              std::vector<Origin>* origin = nullptr) {
  BuchiAutomaton out;
  out.alphabet = a.alphabet | b.alphabet;
  std::map<std::array<int, 3>, int> ids;
  std::vector<std::array<int, 3>> todo;
  auto get = [&](int p, int q, int flag) {
    std::array<int, 3> key{p, q, flag};
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = out.add_state(flag == 0 && a.accepting[p]);
    ids.emplace(key, id);
    todo.push_back(key);
    if (origin) origin->push_back({p, q});
    return id;
  };
  for (int p : a.initial) {
    for (int q : b.initial) out.initial.push_back(get(p, q, 0));
  }
  while (!todo.empty()) {
    auto [p, q, flag] = todo.back();
    todo.pop_back();
    int src = ids.at({p, q, flag});
    int next_flag = flag;
    if (flag == 0 && a.accepting[p]) next_flag = 1;
    else if (flag == 1 && b.accepting[q]) next_flag = 0;
    for (const auto& ea : a.edges[p]) {
      for (const auto& eb : b.edges[q]) {
        Cube g = ea.guard & eb.guard;
        if (!g.consistent()) continue;
        out.add_edge(src, g, get(ea.dst, eb.dst, next_flag));
      }
    }
  }
  return out;
}

/// Disjoint union; initial states of both operands are kept.
inline BuchiAutomaton unite(const BuchiAutomaton& a, const BuchiAutomaton& b) {
  BuchiAutomaton out = a;
  out.alphabet = a.alphabet | b.alphabet;
  const int shift = a.size();
  for (int q = 0; q < b.size(); ++q) out.add_state(b.accepting[q]);
  for (int q = 0; q < b.size(); ++q) {
    for (const auto& e : b.edges[q]) out.edges[shift + q].push_back({e.guard, e.dst + shift});
  }
  for (int q : b.initial) out.initial.push_back(q + shift);
  return out;
}

/// Existential projection onto `keep`: guards drop the erased literals.
/// States are unchanged.
inline BuchiAutomaton project(const BuchiAutomaton& a, VarSet keep) {
  BuchiAutomaton out;
  out.alphabet = a.alphabet & keep;
  out.initial = a.initial;
  for (int q = 0; q < a.size(); ++q) out.add_state(a.accepting[q]);
  for (int q = 0; q < a.size(); ++q) {
    for (const auto& e : a.edges[q]) out.add_edge(q, e.guard.restricted(keep), e.dst);
  }
  return out;
}

/// Drops states that are unreachable or cannot reach an accepting cycle.
/// Also returns the old-to-new state map when requested (-1 = dropped).
inline BuchiAutomaton trim(const BuchiAutomaton& a, std::vector<int>* remap = nullptr) {
  const int n = a.size();
  auto succ = [&](int q) {
    std::vector<int> out;
    for (const auto& e : a.edges[q]) out.push_back(e.dst);
    return out;
  };
  auto comp = detail::scc(n, succ);
  std::vector<int> size(n, 0);
  for (int q = 0; q < n; ++q) ++size[comp[q]];
  std::vector<char> good(n, 0);
  for (int q = 0; q < n; ++q) {
    if (!a.accepting[q]) continue;
    bool self = false;
    for (const auto& e : a.edges[q]) self = self || e.dst == q;
    if (size[comp[q]] > 1 || self) good[q] = 1;
  }
  // Backward closure: states that reach a good state.
  std::vector<std::vector<int>> pred(n);
  for (int q = 0; q < n; ++q) {
    for (const auto& e : a.edges[q]) pred[e.dst].push_back(q);
  }
  std::vector<int> work;
  std::vector<char> live(n, 0);
  for (int q = 0; q < n; ++q) {
    if (good[q]) {
      live[q] = 1;
      work.push_back(q);
    }
  }
  while (!work.empty()) {
    int q = work.back();
    work.pop_back();
    for (int p : pred[q]) {
      if (!live[p]) {
        live[p] = 1;
        work.push_back(p);
      }
    }
  }
  std::vector<char> reach(n, 0);
  for (int q : a.initial) {
    if (live[q] && !reach[q]) {
      reach[q] = 1;
      work.push_back(q);
    }
  }
  while (!work.empty()) {
    int q = work.back();
    work.pop_back();
    for (const auto& e : a.edges[q]) {
      if (live[e.dst] && !reach[e.dst]) {
        reach[e.dst] = 1;
        work.push_back(e.dst);
      }
    }
  }
  std::vector<int> map(n, -1);
  BuchiAutomaton out;
  out.alphabet = a.alphabet;
  for (int q = 0; q < n; ++q) {
    if (reach[q]) map[q] = out.add_state(a.accepting[q]);
  }
  for (int q = 0; q < n; ++q) {
    if (map[q] < 0) continue;
    for (const auto& e : a.edges[q]) {
      if (map[e.dst] >= 0) out.add_edge(map[q], e.guard, map[e.dst]);
    }
  }
  for (int q : a.initial) {
    if (map[q] >= 0) out.initial.push_back(map[q]);
  }
  if (out.size() == 0) {
    out.add_state(false);
    out.initial = {0};
  }
  if (remap) *remap = map;
  return out;
}

/// One-state automaton whose edges are the legal letters of `scope`.
inline BuchiAutomaton legality_automaton(const OneHot& constraints, VarSet scope) {
  BuchiAutomaton a;
  a.add_state(true);
  a.initial = {0};
  VarSet vars = 0;
  for (VarSet g : constraints.groups) {
    if (subset_of(g, scope)) vars |= g;
  }
  a.alphabet = vars;
  for (Valuation v : constraints.letters(vars)) a.add_edge(0, Cube::letter(v, vars), 0);
  return a;
}

}  // namespace domsyn
