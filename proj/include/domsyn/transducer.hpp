#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "domsyn/buchi.hpp"
#include "domsyn/lasso.hpp"

namespace domsyn {

class InterfaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite-state Moore strategy (Q, q0, delta, gamma). The output of a state
/// is emitted before the input of the same step is read.
struct Transducer {
  VarSet inputs = 0;
  VarSet outputs = 0;
  int initial = 0;
  std::vector<Valuation> output;         // per state, subset of outputs
  std::vector<std::vector<int>> next;    // [state][compress(letter, inputs)]
  std::vector<std::string> state_names;  // optional, for printing

  int size() const { return static_cast<int>(output.size()); }
  std::size_t letter_count() const { return std::size_t{1} << popcount(inputs); }

  int step(int q, Valuation v) const {
    return next[q][static_cast<std::size_t>(compress(v & inputs, inputs))];
  }

  /// A transducer with `n` states that stays put on every letter.
  static Transducer with_states(VarSet inputs, VarSet outputs, int n) {
    if ((inputs & outputs) != 0) throw InterfaceError("transducer inputs and outputs overlap");
    if (popcount(inputs) > 20) throw InterfaceError("transducer with more than 20 inputs");
    Transducer t;
    t.inputs = inputs;
    t.outputs = outputs;
    t.output.assign(n, 0);
    t.next.resize(n);
    for (int q = 0; q < n; ++q) t.next[q].assign(t.letter_count(), q);
    return t;
  }

  static Transducer constant(VarSet inputs, VarSet outputs, Valuation out) {
    Transducer t = with_states(inputs, outputs, 1);
    t.output[0] = out & outputs;
    return t;
  }

  std::string state_name(int q) const {
    if (q < static_cast<int>(state_names.size()) && !state_names[q].empty()) return state_names[q];
    return "q" + std::to_string(q);
  }
};

/// The computation comp(s, gamma): position i carries s's output after
/// reading the inputs of positions < i, united with gamma's letter i. gamma
/// must not assign s's outputs.
inline Lasso comp(const Transducer& s, const Lasso& gamma) {
  if (gamma.loop.empty()) throw InterfaceError("environment lasso has an empty loop");
  Valuation overlap = 0;
  for (std::size_t i = 0; i < gamma.positions(); ++i) overlap |= gamma.at(i) & s.outputs;
  if (overlap) throw InterfaceError("environment word assigns variables controlled by the strategy");
  const std::size_t stem = gamma.stem.size(), period = gamma.loop.size();
  std::vector<Valuation> letters;
  std::map<std::pair<int, std::size_t>, std::size_t> seen;  // (state, loop phase) -> position
  int q = s.initial;
  for (std::size_t i = 0;; ++i) {
    if (i >= stem) {
      auto key = std::make_pair(q, (i - stem) % period);
      auto it = seen.find(key);
      if (it != seen.end()) {
        Lasso out;
        out.stem.assign(letters.begin(), letters.begin() + static_cast<long>(it->second));
        out.loop.assign(letters.begin() + static_cast<long>(it->second), letters.end());
        return out;
      }
      seen.emplace(key, i);
    }
    Valuation env = gamma.at(i);
    letters.push_back(s.output[q] | env);
    q = s.step(q, env);
  }
}

/// Parallel composition: a product transducer over the remaining inputs
/// (inp_p ∪ inp_q) \ (out_p ∪ out_q). Each side reads the environment letter
/// united with the other side's current output.
inline Transducer compose(const Transducer& p, const Transducer& q) {
  if (p.outputs & q.outputs) throw InterfaceError("composed strategies share output variables");
  const VarSet outputs = p.outputs | q.outputs;
  const VarSet inputs = (p.inputs | q.inputs) & ~outputs;
  Transducer t;
  t.inputs = inputs;
  t.outputs = outputs;
  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> order;
  auto get = [&](int a, int b) {
    auto it = ids.find({a, b});
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(order.size());
    ids.emplace(std::make_pair(a, b), id);
    order.emplace_back(a, b);
    return id;
  };
  t.initial = get(p.initial, q.initial);
  const std::size_t letters = t.letter_count();
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto [a, b] = order[k];
    std::vector<int> row(letters);
    for (std::size_t l = 0; l < letters; ++l) {
      Valuation env = expand(l, inputs);
      int a2 = p.step(a, env | q.output[b]);
      int b2 = q.step(b, env | p.output[a]);
      row[l] = get(a2, b2);
    }
    t.output.push_back(p.output[a] | q.output[b]);
    t.next.push_back(std::move(row));
  }
  for (auto [a, b] : order) t.state_names.push_back(p.state_name(a) + "." + q.state_name(b));
  return t;
}

/// Language of all computations of the transducer, as a Büchi automaton over
/// inputs ∪ outputs. Only letters accepted by `legal` get edges.
template <typename Legal>
BuchiAutomaton model_automaton(const Transducer& s, Legal&& legal) {
  BuchiAutomaton a;
  a.alphabet = s.inputs | s.outputs;
  for (int q = 0; q < s.size(); ++q) a.add_state(true);
  a.initial = {s.initial};
  for (int q = 0; q < s.size(); ++q) {
    Cube out = Cube::letter(s.output[q], s.outputs);
    for (std::size_t l = 0; l < s.letter_count(); ++l) {
      Valuation in = expand(l, s.inputs);
      if (!legal(in)) continue;
      a.add_edge(q, out & Cube::letter(in, s.inputs), s.next[q][l]);
    }
  }
  return a;
}

inline BuchiAutomaton model_automaton(const Transducer& s) {
  return model_automaton(s, [](Valuation) { return true; });
}

/// Same behavior, states renumbered in breadth-first order from the initial
/// state over letters in numeric order; unreachable states dropped.
inline Transducer normalized(const Transducer& s) {
  std::vector<int> order{s.initial}, map(s.size(), -1);
  map[s.initial] = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (int d : s.next[order[k]]) {
      if (map[d] < 0) {
        map[d] = static_cast<int>(order.size());
        order.push_back(d);
      }
    }
  }
  Transducer t = Transducer::with_states(s.inputs, s.outputs, static_cast<int>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    t.output[k] = s.output[order[k]];
    for (std::size_t l = 0; l < s.letter_count(); ++l) t.next[k][l] = map[s.next[order[k]][l]];
    t.state_names.push_back(s.state_name(order[k]));
  }
  return t;
}

}  // namespace domsyn
