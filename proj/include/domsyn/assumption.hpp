#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "domsyn/buchi.hpp"
#include "domsyn/dominance.hpp"
#include "domsyn/parity.hpp"

namespace domsyn {

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite generator of a regular assumption tree. Branch nodes list their
/// promises (1-based in paths) leading to input nodes; an input node maps
/// each allowed letter over `labels` to the next branch node. A path is fair
/// when it visits non-pending input nodes infinitely often; pending nodes
/// express obligations that must eventually be discharged.
struct AssumptionGenerator {
  struct Branch {
    std::vector<int> promises;
  };
  struct Input {
    std::map<Valuation, int> moves;
    bool pending = false;
  };

  VarSet labels = 0;
  std::vector<Branch> branches;
  std::vector<Input> inputs;
  int root = 0;
  std::string name;

  /// Size bound used by the search: the number of branch nodes.
  int size() const { return static_cast<int>(branches.size()); }

  int add_branch() {
    branches.emplace_back();
    return static_cast<int>(branches.size()) - 1;
  }
  int add_input(bool pending = false) {
    inputs.push_back({{}, pending});
    return static_cast<int>(inputs.size()) - 1;
  }
  void promise(int b, int i) { branches[b].promises.push_back(i); }
  void move(int i, Valuation letter, int b) { inputs[i].moves[letter & labels] = b; }

  /// Branch node reached from input node i on `letter`, or -1.
  int successor(int i, Valuation letter) const {
    auto it = inputs[i].moves.find(letter & labels);
    return it == inputs[i].moves.end() ? -1 : it->second;
  }

  void validate() const {
    auto bad = [&](const std::string& what) { throw GeneratorError("generator '" + name + "': " + what); };
    if (root < 0 || root >= size()) bad("root is not a branch node");
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (branches[b].promises.empty()) bad("branch node " + std::to_string(b) + " has no promise");
      for (int i : branches[b].promises) {
        if (i < 0 || i >= static_cast<int>(inputs.size())) bad("promise to a missing input node");
      }
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].moves.empty()) bad("input node " + std::to_string(i) + " allows no letter");
      for (const auto& [letter, b] : inputs[i].moves) {
        if (letter & ~labels) bad("letter outside the label variables");
        if (b < 0 || b >= size()) bad("move to a missing branch node");
      }
    }
  }
};

/// A generator with an output letter on every input node.
struct AnnotatedGenerator {
  AssumptionGenerator generator;
  VarSet outputs = 0;
  std::vector<Valuation> annotation;  // per input node
};

/// Promise sequence a b c ... as 0^a 1 0^b 1 0^c 1 ...
inline std::string encode_unary(const std::vector<std::size_t>& seq) {
  std::string out;
  for (std::size_t n : seq) out += std::string(n, '0') + "1";
  return out;
}

struct UnaryDecoding {
  std::vector<std::size_t> values;
  std::string remainder;  // trailing zeros without a terminating 1
};

inline UnaryDecoding decode_unary(std::string_view bits) {
  UnaryDecoding out;
  std::size_t run = 0;
  for (char c : bits) {
    if (c == '0') {
      ++run;
    } else if (c == '1') {
      out.values.push_back(run);
      run = 0;
    } else {
      throw GeneratorError(std::string("unary code contains '") + c + "'");
    }
  }
  out.remainder.assign(run, '0');
  return out;
}

/// One step of a tree address: a promise number (1-based) or a letter.
struct PathStep {
  bool is_promise = true;
  std::size_t promise = 0;
  Valuation letter = 0;
};

/// Whether the unfolded tree has the node addressed by `path`, which must
/// alternate promise, letter, promise, ...
inline bool contains_path(const AssumptionGenerator& g, const std::vector<PathStep>& path) {
  int branch = g.root, input = -1;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const PathStep& s = path[k];
    if (s.is_promise != (k % 2 == 0)) throw GeneratorError("path does not alternate promise and letter");
    if (s.is_promise) {
      const auto& ps = g.branches[branch].promises;
      if (s.promise < 1 || s.promise > ps.size()) return false;
      input = ps[s.promise - 1];
    } else {
      branch = g.successor(input, s.letter);
      if (branch < 0) return false;
    }
  }
  return true;
}

/// Word automaton of the tree's fair paths: states are input nodes,
/// initial states the root's promises, accepting states the non-pending
/// ones. With an annotation, each edge also fixes the node's outputs.
inline BuchiAutomaton generator_automaton(const AssumptionGenerator& g, VarSet outputs = 0,
                                          const std::vector<Valuation>* annotation = nullptr) {
  BuchiAutomaton a;
  a.alphabet = g.labels | outputs;
  for (const auto& in : g.inputs) a.add_state(!in.pending);
  a.initial = g.branches[g.root].promises;
  for (std::size_t i = 0; i < g.inputs.size(); ++i) {
    Cube out = annotation ? Cube::letter((*annotation)[i], outputs) : Cube{};
    for (const auto& [letter, b] : g.inputs[i].moves) {
      for (int d : g.branches[b].promises) {
        a.add_edge(static_cast<int>(i), out & Cube::letter(letter, g.labels), d);
      }
    }
  }
  return a;
}

inline BuchiAutomaton generator_automaton(const AnnotatedGenerator& ag) {
  return generator_automaton(ag.generator, ag.outputs, &ag.annotation);
}

/// Dominance of the annotation against every alternative output word on
/// every fair path of the tree.
inline DominanceVerdict check_annotation_dominant(const PrioritizedSpec& spec, const AnnotatedGenerator& ag,
                                                  const Arena& arena) {
  if (ag.outputs != arena.controlled) throw InterfaceError("annotation outputs differ from the process outputs");
  if (ag.generator.labels & ~arena.env()) throw InterfaceError("generator labels include non-environment variables");
  return DominanceChecker(spec, arena).check(generator_automaton(ag));
}

namespace detail {

// Fair simulation game between the fair-path automata of a and b: the
// spoiler moves in a, the duplicator answers in b on the same letter and
// must visit non-pending nodes infinitely often whenever the spoiler does.
// Entry [x][y] says whether the duplicator wins when a starts with root
// promise x and b with root promise y.
inline std::vector<std::vector<char>> fair_simulation_roots(const AssumptionGenerator& a,
                                                            const AssumptionGenerator& b) {
  const int na = static_cast<int>(a.inputs.size()), nb = static_cast<int>(b.inputs.size());
  ParityGame game;
  for (int p = 0; p < na; ++p) {
    for (int q = 0; q < nb; ++q) {
      game.add_node(1, !b.inputs[q].pending ? 2 : (!a.inputs[p].pending ? 1 : 0));
    }
  }
  auto spoiler = [&](int p, int q) { return p * nb + q; };
  const int sink = game.add_node(1, 1);
  game.succ[sink] = {sink};
  for (int p = 0; p < na; ++p) {
    for (int q = 0; q < nb; ++q) {
      for (const auto& [letter, bp] : a.inputs[p].moves) {
        const int bq = b.successor(q, letter);
        for (int p2 : a.branches[bp].promises) {
          const int v = game.add_node(0, 0);
          if (bq < 0) {
            game.succ[v].push_back(sink);
          } else {
            for (int q2 : b.branches[bq].promises) game.succ[v].push_back(spoiler(p2, q2));
          }
          game.succ[spoiler(p, q)].push_back(v);
        }
      }
    }
  }
  const auto solution = solve_parity(game);
  const auto& ra = a.branches[a.root].promises;
  const auto& rb = b.branches[b.root].promises;
  std::vector<std::vector<char>> out(ra.size(), std::vector<char>(rb.size(), 0));
  for (std::size_t x = 0; x < ra.size(); ++x) {
    for (std::size_t y = 0; y < rb.size(); ++y) out[x][y] = solution.winner[spoiler(ra[x], rb[y])] == 0;
  }
  return out;
}

}  // namespace detail

/// Fair simulation of a's fair-path automaton by b's, with b choosing its
/// root promise after a. Implies that a's language is contained in b's;
/// used as the permissiveness preorder.
inline bool simulated_by(const AssumptionGenerator& a, const AssumptionGenerator& b) {
  if (a.labels != b.labels) return false;
  for (const auto& row : detail::fair_simulation_roots(a, b)) {
    if (std::find(row.begin(), row.end(), 1) == row.end()) return false;
  }
  return true;
}

/// Game deciding whether a promise-selection function keeps the higher
/// process's tree matched while the lower process runs inside its own tree.
/// The adversary picks the lower promise, then the lower letter and values
/// for higher label variables outside the lower process's view; the
/// resolver picks the higher promise after seeing the lower one (and hence
/// the lower annotation). A letter the higher input node does not allow
/// loses for the resolver; otherwise the resolver must make the higher path
/// fair whenever the lower path is fair.
class CompatibilityGame {
 public:
  CompatibilityGame(const AnnotatedGenerator& lower, const AssumptionGenerator& higher, const OneHot& one_hot)
      : lower_(lower), higher_(higher) {
    const auto& lg = lower.generator;
    if (lg.labels & lower.outputs) throw InterfaceError("lower generator reads its own outputs");
    const int bl = lg.size(), il = static_cast<int>(lg.inputs.size());
    const int bh = higher.size(), ih = static_cast<int>(higher.inputs.size());
    off1_ = bl * bh;
    off2_ = off1_ + il * bh;
    sink_ = off2_ + il * ih;
    for (int k = 0; k < sink_; ++k) game_.add_node(k < off1_ || k >= off2_ ? 1 : 0, 0);
    game_.add_node(1, 1);
    game_.succ[sink_] = {sink_};
    const VarSet free = higher.labels & ~(lg.labels | lower.outputs);
    const VarSet scope = lg.labels | lower.outputs | free;
    const auto free_letters = one_hot.letters(free);
    for (int b = 0; b < bl; ++b) {
      for (int h = 0; h < bh; ++h) {
        for (int i : lg.branches[b].promises) game_.succ[p0(b, h)].push_back(p1(i, h));
      }
    }
    for (int i = 0; i < il; ++i) {
      for (int h = 0; h < bh; ++h) {
        for (int j : higher.branches[h].promises) game_.succ[p1(i, h)].push_back(p2(i, j));
      }
      const Valuation ann = lower.annotation[i] & lower.outputs;
      for (int j = 0; j < ih; ++j) {
        const int v = p2(i, j);
        game_.color[v] = !higher.inputs[j].pending ? 2 : (!lg.inputs[i].pending ? 1 : 0);
        for (const auto& [x, b] : lg.inputs[i].moves) {
          for (Valuation y : free_letters) {
            Valuation joint = x | ann | y;
            if (!one_hot.legal(joint, scope)) continue;
            int h = higher.successor(j, joint);
            game_.succ[v].push_back(h < 0 ? sink_ : p0(b, h));
          }
        }
        if (game_.succ[v].empty()) game_.succ[v].push_back(sink_);
      }
    }
    solution_ = solve_parity(game_);
  }

  bool compatible() const { return solution_.winner[p0(lower_.generator.root, higher_.root)] == 0; }

  /// The higher input node chosen when the lower process took input node
  /// `lower_input` and the higher tree is at `higher_branch`; -1 if the
  /// resolver has no winning choice there.
  int resolve(int lower_input, int higher_branch) const {
    int s = solution_.strategy[p1(lower_input, higher_branch)];
    return s < 0 ? -1 : (s - off2_) % static_cast<int>(higher_.inputs.size());
  }

  /// A play from the root along the adversary's winning strategy (resolver
  /// taking first choices), as alternating node names; empty if compatible.
  std::string trace() const {
    if (compatible()) return {};
    std::string out;
    std::vector<char> seen(game_.size(), 0);
    int v = p0(lower_.generator.root, higher_.root);
    while (!seen[v]) {
      seen[v] = 1;
      out += describe(v) + " ";
      int next = game_.owner[v] == 1 && solution_.strategy[v] >= 0 ? solution_.strategy[v] : game_.succ[v][0];
      v = next;
    }
    out += describe(v);
    return out;
  }

 private:
  int p0(int b, int h) const { return b * higher_.size() + h; }
  int p1(int i, int h) const { return off1_ + i * higher_.size() + h; }
  int p2(int i, int j) const { return off2_ + i * static_cast<int>(higher_.inputs.size()) + j; }

  std::string describe(int v) const {
    const int bh = higher_.size(), ih = static_cast<int>(higher_.inputs.size());
    if (v == sink_) return "leaves-higher-tree";
    if (v < off1_) return "(b" + std::to_string(v / bh) + ",B" + std::to_string(v % bh) + ")";
    if (v < off2_) return "(i" + std::to_string((v - off1_) / bh) + ",B" + std::to_string((v - off1_) % bh) + ")";
    return "(i" + std::to_string((v - off2_) / ih) + ",I" + std::to_string((v - off2_) % ih) + ")";
  }

  const AnnotatedGenerator& lower_;
  const AssumptionGenerator& higher_;
  ParityGame game_;
  ParitySolution solution_;
  int off1_ = 0, off2_ = 0, sink_ = 0;
};

struct CompatibilityResult {
  bool compatible = true;
  std::string trace;
};

inline CompatibilityResult check_compatible(const AnnotatedGenerator& lower, const AssumptionGenerator& higher,
                                            const OneHot& one_hot) {
  CompatibilityGame game(lower, higher, one_hot);
  return {game.compatible(), game.trace()};
}

/// The generator whose single input node allows every legal letter over
/// `labels`, looping back to its only branch node.
inline AssumptionGenerator universal_generator(VarSet labels, const OneHot& one_hot) {
  AssumptionGenerator g;
  g.labels = labels;
  g.name = "universal";
  int b = g.add_branch(), i = g.add_input();
  g.promise(b, i);
  for (Valuation v : one_hot.letters(labels)) g.move(i, v, b);
  return g;
}

/// Free lower process over all of g's labels, for universality.
inline AnnotatedGenerator free_environment(const AssumptionGenerator& g, const OneHot& one_hot) {
  return AnnotatedGenerator{universal_generator(g.labels, one_hot), 0, {0}};
}

/// Whether promises can be chosen online so that every letter sequence
/// stays in the tree along a fair path.
inline bool is_universal(const AssumptionGenerator& g, const OneHot& one_hot) {
  auto env = free_environment(g, one_hot);
  return CompatibilityGame(env, g, one_hot).compatible();
}

}  // namespace domsyn
