#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "domsyn/buchi.hpp"
#include "domsyn/semantics.hpp"

namespace domsyn {

namespace detail {

// Tableau construction producing a transition-based generalized Büchi
// automaton (one acceptance set per eventuality), degeneralized with a level
// counter. States of the tableau are sets of obligations for the current
// position.
class Tableau {
 public:
  explicit Tableau(const FormulaPtr& f) { root_ = intern(f); }

  BuchiAutomaton build() {
    // Tableau states are sorted obligation sets; degeneralized states add a
    // level in [0, m] where m = number of eventualities.
    const int m = static_cast<int>(eventualities_.size());
    std::map<std::pair<std::vector<int>, int>, int> ids;
    std::vector<std::pair<std::vector<int>, int>> todo;
    BuchiAutomaton out;
    auto get = [&](const std::vector<int>& obligations, int level) {
      auto key = std::make_pair(obligations, level);
      auto it = ids.find(key);
      if (it != ids.end()) return it->second;
      int id = out.add_state(level == m);
      ids.emplace(key, id);
      todo.push_back(key);
      return id;
    };
    out.initial = {get({root_}, 0)};
    std::map<std::vector<int>, std::vector<Transition>> cache;
    while (!todo.empty()) {
      auto [obligations, level] = todo.back();
      todo.pop_back();
      int src = ids.at({obligations, level});
      auto it = cache.find(obligations);
      if (it == cache.end()) it = cache.emplace(obligations, expand(obligations)).first;
      for (const auto& t : it->second) {
        int c = level == m ? 0 : level;
        while (c < m && !t.postponed.count(eventualities_[c])) ++c;
        out.add_edge(src, t.guard, get(t.next, c));
      }
    }
    out.alphabet = 0;
    for (const auto& node : nodes_) {
      if (node->op() == Op::kAtom) out.alphabet |= bit(node->atom());
    }
    return trim(out);
  }

 private:
  struct Transition {
    Cube guard;
    std::vector<int> next;
    std::set<int> postponed;
  };

  int intern(const FormulaPtr& f) {
    int l = f->lhs() ? intern(f->lhs()) : -1;
    int r = f->rhs() ? intern(f->rhs()) : -1;
    auto key = std::make_tuple(static_cast<int>(f->op()), f->atom(), l, r);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(f);
    kids_.push_back({l, r});
    ids_.emplace(key, id);
    if (f->op() == Op::kUntil || f->op() == Op::kEventually) eventualities_.push_back(id);
    return id;
  }

  std::vector<Transition> expand(const std::vector<int>& obligations) {
    std::vector<Transition> out;
    Transition t;
    std::vector<int> todo(obligations.rbegin(), obligations.rend());
    std::set<int> next;
    expand_rec(todo, t.guard, next, t.postponed, out);
    return out;
  }

  void expand_rec(std::vector<int> todo, Cube guard, std::set<int> next, std::set<int> postponed,
                  std::vector<Transition>& out) {
    while (!todo.empty()) {
      int id = todo.back();
      todo.pop_back();
      const FormulaPtr& f = nodes_[id];
      auto [l, r] = kids_[id];
      switch (f->op()) {
        case Op::kTrue: break;
        case Op::kFalse: return;
        case Op::kAtom:
          guard.pos |= bit(f->atom());
          if (!guard.consistent()) return;
          break;
        case Op::kNot:
          // NNF: operand is an atom.
          guard.neg |= bit(nodes_[l]->atom());
          if (!guard.consistent()) return;
          break;
        case Op::kAnd:
          todo.push_back(r);
          todo.push_back(l);
          break;
        case Op::kOr: {
          auto left = todo;
          left.push_back(l);
          expand_rec(left, guard, next, postponed, out);
          todo.push_back(r);
          break;
        }
        case Op::kNext: next.insert(l); break;
        case Op::kGlobally:
          next.insert(id);
          todo.push_back(l);
          break;
        case Op::kEventually: {
          auto now = todo;
          now.push_back(l);
          expand_rec(now, guard, next, postponed, out);
          next.insert(id);
          postponed.insert(id);
          break;
        }
        case Op::kUntil: {
          auto now = todo;
          now.push_back(r);
          expand_rec(now, guard, next, postponed, out);
          next.insert(id);
          postponed.insert(id);
          todo.push_back(l);
          break;
        }
        case Op::kRelease: {
          auto both = todo;
          both.push_back(l);
          both.push_back(r);
          expand_rec(both, guard, next, postponed, out);
          next.insert(id);
          todo.push_back(r);
          break;
        }
        default: throw std::invalid_argument("ltl_to_buchi expects a formula in NNF");
      }
    }
    Transition t{guard, std::vector<int>(next.begin(), next.end()), postponed};
    for (const auto& o : out) {
      if (o.guard == t.guard && o.next == t.next && o.postponed == t.postponed) return;
    }
    out.push_back(std::move(t));
  }

  std::vector<FormulaPtr> nodes_;
  std::vector<std::pair<int, int>> kids_;
  std::map<std::tuple<int, int, int, int>, int> ids_;
  std::vector<int> eventualities_;
  int root_ = -1;
};

}  // namespace detail

/// Büchi automaton accepting exactly the models of f. Non-NNF input is
/// normalized first.
inline BuchiAutomaton ltl_to_buchi(const FormulaPtr& f) {
  return detail::Tableau(is_nnf(f) ? f : to_nnf(f)).build();
}

}  // namespace domsyn
