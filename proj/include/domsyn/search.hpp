#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "domsyn/architecture.hpp"
#include "domsyn/assumption.hpp"
#include "domsyn/dominance.hpp"

namespace domsyn {

using LetterSet = std::vector<Valuation>;  // sorted

/// Generator shapes used by the bounded search. Every shape takes the label
/// variables and the full set of legal letters over them; `s` is a letter
/// class and `rest` its complement.
namespace shapes {

namespace detail {

inline LetterSet complement(const LetterSet& all, const LetterSet& s) {
  LetterSet out;
  std::set_difference(all.begin(), all.end(), s.begin(), s.end(), std::back_inserter(out));
  return out;
}

inline AssumptionGenerator start(VarSet labels, std::string name) {
  AssumptionGenerator g;
  g.labels = labels;
  g.name = std::move(name);
  return g;
}

// Branch node with a single non-pending input node allowing everything and
// looping back.
inline int universal_tail(AssumptionGenerator& g, const LetterSet& all) {
  int b = g.add_branch(), i = g.add_input();
  g.promise(b, i);
  for (Valuation v : all) g.move(i, v, b);
  return b;
}

}  // namespace detail

inline AssumptionGenerator universal(VarSet labels, const LetterSet& all) {
  auto g = detail::start(labels, "universal");
  detail::universal_tail(g, all);
  return g;
}

/// Every letter is in s.
inline AssumptionGenerator invariant(VarSet labels, const LetterSet& s, std::string name = "invariant") {
  auto g = detail::start(labels, std::move(name));
  int b = g.add_branch(), i = g.add_input();
  g.promise(b, i);
  for (Valuation v : s) g.move(i, v, b);
  return g;
}

/// Some letter is eventually in s; a pending node waits for it.
inline AssumptionGenerator eventually(VarSet labels, const LetterSet& all, const LetterSet& s) {
  auto g = detail::start(labels, "eventually");
  int b = g.add_branch(), w = g.add_input(true);
  g.promise(b, w);
  int u = detail::universal_tail(g, all);
  for (Valuation v : all) g.move(w, v, b);
  for (Valuation v : s) g.move(w, v, u);
  return g;
}

/// A letter in s occurs within the first h steps.
inline AssumptionGenerator within(VarSet labels, const LetterSet& all, const LetterSet& s, int h) {
  auto g = detail::start(labels, "within" + std::to_string(h));
  const LetterSet rest = detail::complement(all, s);
  std::vector<int> chain;
  for (int k = 0; k < h; ++k) chain.push_back(g.add_branch());
  int u = detail::universal_tail(g, all);
  for (int k = 0; k < h; ++k) {
    int i = g.add_input();
    g.promise(chain[k], i);
    for (Valuation v : s) g.move(i, v, u);
    if (k + 1 < h) {
      for (Valuation v : rest) g.move(i, v, chain[k + 1]);
    }
  }
  return g;
}

/// The root offers "never s" (re-offered after every step) and
/// "eventually s".
inline AssumptionGenerator never_or_eventually(VarSet labels, const LetterSet& all, const LetterSet& s) {
  auto g = detail::start(labels, "never-or-eventually");
  const LetterSet rest = detail::complement(all, s);
  int r = g.add_branch(), never = g.add_input(), wait = g.add_input(true);
  g.promise(r, never);
  g.promise(r, wait);
  int bw = g.add_branch();
  g.promise(bw, wait);
  int u = detail::universal_tail(g, all);
  for (Valuation v : rest) g.move(never, v, r);
  for (Valuation v : rest) g.move(wait, v, bw);
  for (Valuation v : s) g.move(wait, v, u);
  return g;
}

/// Every step announces whether the next letter is in s or in rest. With
/// `initial` (0 for s, 1 for rest) the first letter's class is fixed too;
/// otherwise the first letter is free.
inline AssumptionGenerator next_announcement(VarSet labels, const LetterSet& all, const LetterSet& s,
                                             std::optional<int> initial) {
  auto g = detail::start(labels, initial ? "announce-next" : "announce-next-free");
  const LetterSet cls[2] = {s, detail::complement(all, s)};
  int root = -1;
  if (!initial) root = g.add_branch();
  int beta[2] = {g.add_branch(), g.add_branch()};
  if (initial) g.root = beta[*initial];
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 2; ++d) {
      int i = g.add_input();
      g.promise(beta[c], i);
      for (Valuation v : cls[c]) g.move(i, v, beta[d]);
    }
  }
  if (!initial) {
    g.root = root;
    for (int d = 0; d < 2; ++d) {
      int i = g.add_input();
      g.promise(root, i);
      for (Valuation v : all) g.move(i, v, beta[d]);
    }
  }
  return g;
}

/// The root announces the class of the second letter (s or rest); nothing
/// else is constrained.
inline AssumptionGenerator step_one(VarSet labels, const LetterSet& all, const LetterSet& s) {
  auto g = detail::start(labels, "step-one");
  const LetterSet cls[2] = {s, detail::complement(all, s)};
  int r = g.add_branch();
  int mid[2] = {g.add_branch(), g.add_branch()};
  int u = detail::universal_tail(g, all);
  for (int c = 0; c < 2; ++c) {
    int first = g.add_input();
    g.promise(r, first);
    for (Valuation v : all) g.move(first, v, mid[c]);
    int second = g.add_input();
    g.promise(mid[c], second);
    for (Valuation v : cls[c]) g.move(second, v, u);
  }
  return g;
}

/// The second letter is in s; nothing else is constrained.
inline AssumptionGenerator step_one_single(VarSet labels, const LetterSet& all, const LetterSet& s) {
  auto g = detail::start(labels, "step-one-single");
  int r = g.add_branch(), mid = g.add_branch();
  int u = detail::universal_tail(g, all);
  int first = g.add_input(), second = g.add_input();
  g.promise(r, first);
  g.promise(mid, second);
  for (Valuation v : all) g.move(first, v, mid);
  for (Valuation v : s) g.move(second, v, u);
  return g;
}

/// Deterministic and universal: the branch node remembers the last `depth`
/// letters (fewer at the start).
inline AssumptionGenerator history(VarSet labels, const LetterSet& all, int depth) {
  auto g = detail::start(labels, "history" + std::to_string(depth));
  std::map<std::vector<Valuation>, int> ids;
  std::vector<std::vector<Valuation>> order;
  auto get = [&](const std::vector<Valuation>& h) {
    auto [it, fresh] = ids.emplace(h, g.size());
    if (fresh) {
      g.add_branch();
      order.push_back(h);
    }
    return it->second;
  };
  get({});
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto h = order[k];
    int i = g.add_input();
    g.promise(static_cast<int>(k), i);
    for (Valuation v : all) {
      auto next = h;
      next.push_back(v);
      if (static_cast<int>(next.size()) > depth) next.erase(next.begin());
      g.move(i, v, get(next));
    }
  }
  return g;
}

/// A fresh root offering the root promises of both operands.
inline AssumptionGenerator combine(const AssumptionGenerator& a, const AssumptionGenerator& b) {
  if (a.labels != b.labels) throw GeneratorError("combined generators have different labels");
  auto g = detail::start(a.labels, "combine(" + a.name + "," + b.name + ")");
  const int ba = a.size(), ia = static_cast<int>(a.inputs.size());
  g.branches = a.branches;
  g.inputs = a.inputs;
  for (auto br : b.branches) {
    for (int& i : br.promises) i += ia;
    g.branches.push_back(br);
  }
  for (auto in : b.inputs) {
    for (auto& [_, t] : in.moves) t += ba;
    g.inputs.push_back(in);
  }
  g.root = g.add_branch();
  for (int i : a.branches[a.root].promises) g.promise(g.root, i);
  for (int i : b.branches[b.root].promises) g.promise(g.root, i + ia);
  return g;
}

}  // namespace shapes

/// Environment variables the process's objectives depend on: those named
/// in the spec, plus the plant's inputs when the spec names plant state,
/// closed under one-hot groups.
inline VarSet label_vars(const PrioritizedSpec& spec, const Arena& arena) {
  VarSet atoms = spec.atoms();
  VarSet out = atoms;
  if (arena.plant && (atoms & arena.plant->outputs)) out |= arena.plant->inputs;
  out = arena.one_hot.close(out & arena.env()) & arena.env();
  return out;
}

/// Letter classes: all proper nonempty subsets for at most four letters,
/// otherwise the letters with / without each single variable.
inline std::vector<LetterSet> letter_classes(VarSet labels, const LetterSet& all) {
  std::vector<LetterSet> out;
  if (all.size() <= 4) {
    const std::size_t n = all.size();
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
      LetterSet s;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask & (std::size_t{1} << k)) s.push_back(all[k]);
      }
      out.push_back(s);
    }
    return out;
  }
  for (int v = 0; v < 64; ++v) {
    if (!(labels & bit(v))) continue;
    for (bool positive : {true, false}) {
      LetterSet s;
      for (Valuation l : all) {
        if (((l & bit(v)) != 0) == positive) s.push_back(l);
      }
      if (!s.empty() && s.size() < all.size()) out.push_back(s);
    }
  }
  return out;
}

/// Base shapes with at most `bound` branch nodes, in canonical order.
inline std::vector<AssumptionGenerator> base_shapes(VarSet labels, const LetterSet& all, int bound) {
  std::vector<AssumptionGenerator> out;
  auto add = [&](AssumptionGenerator g) {
    if (g.size() <= bound) out.push_back(std::move(g));
  };
  const auto classes = letter_classes(labels, all);
  add(shapes::universal(labels, all));
  for (const auto& s : classes) add(shapes::invariant(labels, s));
  for (const auto& s : classes) add(shapes::eventually(labels, all, s));
  for (int h = 1; h + 1 <= bound; ++h) {
    for (const auto& s : classes) add(shapes::within(labels, all, s, h));
  }
  for (const auto& s : classes) add(shapes::never_or_eventually(labels, all, s));
  for (const auto& s : classes) {
    if (s.front() != all.front()) continue;  // each partition once
    add(shapes::next_announcement(labels, all, s, 0));
    add(shapes::next_announcement(labels, all, s, 1));
    add(shapes::next_announcement(labels, all, s, std::nullopt));
  }
  for (const auto& s : classes) {
    if (s.front() == all.front()) add(shapes::step_one(labels, all, s));
  }
  for (const auto& s : classes) add(shapes::step_one_single(labels, all, s));
  std::size_t nodes = 1, layer = 1;
  for (int d = 1;; ++d) {
    layer *= all.size();
    nodes += layer;
    if (all.size() < 2 || nodes > static_cast<std::size_t>(bound)) break;
    out.push_back(shapes::history(labels, all, d));
  }
  return out;
}

/// First dominant memoryless annotation (input node -> output letter) in
/// lexicographic order. Partial annotations are checked on the automaton
/// restricted to annotated nodes, whose counterexamples survive every
/// completion.
inline std::optional<std::vector<Valuation>> find_annotation(const DominanceChecker& checker,
                                                             const AssumptionGenerator& g) {
  const VarSet outputs = checker.arena().controlled;
  const auto letters = checker.arena().one_hot.letters(outputs);
  const std::size_t n = g.inputs.size();
  std::vector<Valuation> ann(n, 0);
  auto partial = [&](std::size_t upto) {
    BuchiAutomaton a = generator_automaton(g, outputs, &ann);
    for (std::size_t i = upto; i < n; ++i) a.edges[i].clear();
    for (auto& es : a.edges) {
      std::erase_if(es, [&](const Edge& e) { return static_cast<std::size_t>(e.dst) >= upto; });
    }
    std::erase_if(a.initial, [&](int q) { return static_cast<std::size_t>(q) >= upto; });
    return a;
  };
  auto dfs = [&](auto&& self, std::size_t k) -> bool {
    if (k == n) return true;
    for (Valuation o : letters) {
      ann[k] = o;
      if (!checker.check(partial(k + 1)).dominant) continue;
      if (self(self, k + 1)) return true;
    }
    return false;
  };
  if (!dfs(dfs, 0)) return std::nullopt;
  return ann;
}

/// Dominant annotated generators with at most `bound` branch nodes, most
/// permissive first under fair simulation; incomparable ones keep canonical
/// order.
inline std::vector<AnnotatedGenerator> search_assumption_bounded(const PrioritizedSpec& spec, const Arena& arena,
                                                                 int bound) {
  const VarSet labels = label_vars(spec, arena);
  const LetterSet all = arena.one_hot.letters(labels);
  DominanceChecker checker(spec, arena);
  std::vector<AnnotatedGenerator> base;
  for (auto& g : base_shapes(labels, all, bound)) {
    if (auto ann = find_annotation(checker, g)) base.push_back({std::move(g), arena.controlled, std::move(*ann)});
  }

  // Fair simulation decomposes over root promises, and a combination's root
  // promises are those of its parts, so one game per pair of base
  // generators decides the preorder on every result.
  std::vector<std::size_t> first_comp;
  std::size_t comps = 0;
  for (const auto& ag : base) {
    first_comp.push_back(comps);
    comps += ag.generator.branches[ag.generator.root].promises.size();
  }
  const std::size_t words = (comps + 63) / 64;
  using Mask = std::vector<std::uint64_t>;
  auto set = [](Mask& m, std::size_t k) { m[k / 64] |= std::uint64_t{1} << (k % 64); };
  std::vector<Mask> below(comps, Mask(words, 0));  // components simulating component c
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = 0; j < base.size(); ++j) {
      auto m = detail::fair_simulation_roots(base[i].generator, base[j].generator);
      for (std::size_t x = 0; x < m.size(); ++x) {
        for (std::size_t y = 0; y < m[x].size(); ++y) {
          if (m[x][y]) set(below[first_comp[i] + x], first_comp[j] + y);
        }
      }
    }
  }
  auto own = [&](std::size_t i) {
    Mask m(words, 0);
    for (std::size_t x = 0; x < base[i].generator.branches[base[i].generator.root].promises.size(); ++x) {
      set(m, first_comp[i] + x);
    }
    return m;
  };
  auto le = [&](const Mask& a, const Mask& b) {
    for (std::size_t c = 0; c < comps; ++c) {
      if (!(a[c / 64] >> (c % 64) & 1)) continue;
      bool hit = false;
      for (std::size_t w = 0; w < words && !hit; ++w) hit = (below[c][w] & b[w]) != 0;
      if (!hit) return false;
    }
    return true;
  };

  std::vector<AnnotatedGenerator> found = base;
  std::vector<Mask> masks;
  for (std::size_t i = 0; i < base.size(); ++i) masks.push_back(own(i));
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = i + 1; j < base.size(); ++j) {
      if (base[i].generator.size() + base[j].generator.size() + 1 > bound) continue;
      // Comparable parts add nothing over the larger one.
      if (le(masks[i], masks[j]) || le(masks[j], masks[i])) continue;
      // Paths never return to the fresh root, so the combination is
      // dominant with the two annotations side by side.
      AnnotatedGenerator c{shapes::combine(base[i].generator, base[j].generator), arena.controlled,
                           base[i].annotation};
      c.annotation.insert(c.annotation.end(), base[j].annotation.begin(), base[j].annotation.end());
      found.push_back(std::move(c));
      Mask m = masks[i];
      for (std::size_t w = 0; w < words; ++w) m[w] |= masks[j][w];
      masks.push_back(std::move(m));
    }
  }

  // Kahn's algorithm over "strictly more permissive", smallest index first.
  const std::size_t n = found.size();
  std::vector<std::vector<char>> leq(n, std::vector<char>(n, 0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) leq[a][b] = a == b || le(masks[a], masks[b]);
  }
  std::vector<std::size_t> above(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) above[a] += leq[a][b] && !leq[b][a];
  }
  std::set<std::size_t> ready;
  for (std::size_t a = 0; a < n; ++a) {
    if (above[a] == 0) ready.insert(a);
  }
  std::vector<AnnotatedGenerator> out;
  while (!ready.empty()) {
    std::size_t b = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(std::move(found[b]));
    for (std::size_t a = 0; a < n; ++a) {
      if (leq[a][b] && !leq[b][a] && --above[a] == 0) ready.insert(a);
    }
  }
  return out;
}

/// The arena of one process: it controls its outputs, everything else
/// except plant state belongs to its environment.
inline Arena process_arena(const Architecture& arch, const std::string& process,
                           const std::optional<Transducer>& plant) {
  Arena a;
  a.universe = arch.universe;
  a.controlled = arch.process(process).outputs;
  a.plant = plant;
  a.one_hot = arch.one_hot;
  return a;
}

struct ProcessProblem {
  std::string name;
  PrioritizedSpec spec;
  Arena arena;
};

struct PropagationResult {
  bool success = false;
  std::string failure;
  std::vector<AnnotatedGenerator> chosen;      // per process, in priority order
  std::vector<std::size_t> candidates;         // search results per process
  std::optional<Transducer> joint;             // over the external inputs
  std::map<std::string, Transducer> strategies;  // joint, restricted to each process's outputs
};

namespace detail {

// Joint transducer whose state is the tuple of current branch nodes. Each
// step resolves promises from the lowest process upwards: the last process
// plays against the free environment, every other one against the process
// right below it.
inline Transducer extract_joint(const std::vector<AnnotatedGenerator>& chosen, VarSet external,
                                const OneHot& one_hot) {
  const std::size_t n = chosen.size();
  auto free_env = free_environment(chosen.back().generator, one_hot);
  std::vector<std::unique_ptr<CompatibilityGame>> games(n);
  games[n - 1] = std::make_unique<CompatibilityGame>(free_env, chosen.back().generator, one_hot);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    games[j] = std::make_unique<CompatibilityGame>(chosen[j + 1], chosen[j].generator, one_hot);
  }
  VarSet outputs = 0;
  for (const auto& ag : chosen) outputs |= ag.outputs;
  Transducer t;
  t.inputs = external & ~outputs;
  t.outputs = outputs;
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> order;
  auto get = [&](const std::vector<int>& s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(order.size());
    ids.emplace(s, id);
    order.push_back(s);
    return id;
  };
  std::vector<int> start;
  for (const auto& ag : chosen) start.push_back(ag.generator.root);
  t.initial = get(start);
  const auto legal = one_hot.letters(t.inputs);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::vector<int> b = order[k];
    std::vector<int> in(n);
    for (std::size_t j = n; j-- > 0;) {
      in[j] = games[j]->resolve(j + 1 == n ? 0 : in[j + 1], b[j]);
      if (in[j] < 0) throw std::logic_error("promise resolution left the winning region");
    }
    Valuation out = 0;
    for (std::size_t j = 0; j < n; ++j) out |= chosen[j].annotation[in[j]] & chosen[j].outputs;
    std::vector<int> row(t.letter_count(), static_cast<int>(k));
    for (Valuation x : legal) {
      Valuation letter = x | out;
      std::vector<int> next(n);
      for (std::size_t j = 0; j < n; ++j) {
        next[j] = chosen[j].generator.successor(in[j], letter);
        if (next[j] < 0) throw std::logic_error("extracted run left an assumption tree");
      }
      row[static_cast<std::size_t>(compress(x, t.inputs))] = get(next);
    }
    t.output.push_back(out);
    t.next.push_back(std::move(row));
  }
  for (const auto& s : order) {
    std::string name;
    for (std::size_t j = 0; j < n; ++j) name += (j ? "." : "") + std::to_string(s[j]);
    t.state_names.push_back(name);
  }
  return t;
}

}  // namespace detail

/// Assumption propagation along the priority order (first = most
/// critical): each process takes the most permissive dominant annotated
/// generator compatible with the one chosen for the process right above
/// it; the last one must also be universal. Backtracks over choices.
inline PropagationResult propagate(const std::vector<ProcessProblem>& problems, VarSet external,
                                   const OneHot& one_hot, int bound) {
  PropagationResult r;
  if (problems.empty()) throw std::invalid_argument("no processes to propagate over");
  std::vector<std::vector<AnnotatedGenerator>> lists;
  for (const auto& p : problems) {
    lists.push_back(search_assumption_bounded(p.spec, p.arena, bound));
    r.candidates.push_back(lists.back().size());
    if (lists.back().empty()) {
      r.failure = "no dominant annotated generator for '" + p.name + "' within " + std::to_string(bound) +
                  " branch nodes";
      return r;
    }
  }
  const std::size_t n = problems.size();
  std::vector<std::size_t> pick(n, 0);
  std::vector<const AnnotatedGenerator*> chosen(n, nullptr);
  auto dfs = [&](auto&& self, std::size_t j) -> bool {
    if (j == n) return true;
    for (const auto& cand : lists[j]) {
      if (j > 0 && !CompatibilityGame(cand, chosen[j - 1]->generator, one_hot).compatible()) continue;
      if (j + 1 == n && !is_universal(cand.generator, one_hot)) continue;
      chosen[j] = &cand;
      if (self(self, j + 1)) return true;
    }
    return false;
  };
  if (!dfs(dfs, 0)) {
    r.failure = "no compatible choice with a universal residual assumption for '" + problems.back().name +
                "' within " + std::to_string(bound) + " branch nodes";
    return r;
  }
  for (const auto* c : chosen) r.chosen.push_back(*c);
  r.joint = detail::extract_joint(r.chosen, external, one_hot);
  for (std::size_t j = 0; j < n; ++j) {
    Transducer s = *r.joint;
    s.outputs = r.chosen[j].outputs;
    for (auto& o : s.output) o &= s.outputs;
    r.strategies.emplace(problems[j].name, std::move(s));
  }
  r.success = true;
  return r;
}

}  // namespace domsyn
