#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "domsyn/buchi.hpp"
#include "domsyn/ltl2buchi.hpp"
#include "domsyn/semantics.hpp"
#include "domsyn/transducer.hpp"

namespace domsyn {

/// The setting a single process is judged in: which variables it controls,
/// the plant that drives state predicates, the one-hot constraints on every
/// letter, and optionally an assumption restricting environment words.
struct Arena {
  UniversePtr universe;
  VarSet controlled = 0;
  std::optional<Transducer> plant;
  OneHot one_hot;
  std::optional<BuchiAutomaton> assumption;  // over env()

  VarSet variables() const { return universe->all(); }
  VarSet plant_outputs() const { return plant ? plant->outputs : 0; }
  /// Variables chosen by the environment: neither controlled nor plant state.
  VarSet env() const { return variables() & ~controlled & ~plant_outputs(); }

  /// Words consistent with the plant and the one-hot constraints.
  BuchiAutomaton constraint() const {
    auto legal = legality_automaton(one_hot, variables());
    if (!plant) return legal;
    return product(model_automaton(*plant), legal);
  }

  bool admits(const Lasso& gamma) const { return !assumption || accepts(*assumption, gamma); }

  /// The full word for environment letters `gamma` and output letters
  /// `outputs`, with plant predicates filled in.
  Lasso word(const Lasso& gamma, const Lasso& outputs) const {
    Lasso w = merge(gamma.masked(env()), outputs.masked(controlled));
    return plant ? comp(*plant, w) : w;
  }

  /// The word produced by strategy s on gamma, including plant predicates.
  Lasso run(const Transducer& s, const Lasso& gamma) const {
    Lasso g = gamma.masked(env());
    return plant ? comp(compose(s, *plant), g) : comp(s, g);
  }
};

struct Counterexample {
  Lasso gamma;    // environment letters
  Lasso outputs;  // the candidate's outputs on gamma
  Lasso better;   // alternative outputs on gamma
  std::size_t k = 0;  // priority achieved by the candidate
  std::size_t m = 0;  // priority achieved by the alternative
};

struct DominanceVerdict {
  bool dominant = true;
  std::optional<Counterexample> counterexample;
};

/// Re-evaluates a counterexample on the words it describes.
inline bool validate(const PrioritizedSpec& spec, const Arena& arena, const Counterexample& c) {
  if (c.m <= c.k || !arena.admits(c.gamma)) return false;
  return achieved_priority_on_word(spec, arena.word(c.gamma, c.outputs)) == c.k &&
         achieved_priority_on_word(spec, arena.word(c.gamma, c.better)) == c.m;
}

/// Environment words on which some output word satisfies phi^k (plant and
/// one-hot constraints included).
inline BuchiAutomaton achievability_automaton(const PrioritizedSpec& spec, std::size_t k,
                                              const Arena& arena) {
  if (k < 1 || k > spec.size()) throw SpecError("priority out of range");
  return trim(project(product(arena.constraint(), ltl_to_buchi(partial_conjunction(spec, k))),
                      arena.env()));
}

struct WinningVerdict {
  bool winning = true;
  std::optional<Lasso> gamma;
};

/// Winning check against a fixed formula; behaviours are automata over
/// env() ∪ controlled.
class WinningChecker {
 public:
  WinningChecker(const FormulaPtr& f, Arena arena) : arena_(std::move(arena)) {
    bad_ = trim(product(arena_.constraint(), ltl_to_buchi(negate_nnf(f))));
    if (arena_.assumption) bad_ = trim(product(bad_, *arena_.assumption));
  }

  WinningVerdict check(const BuchiAutomaton& behaviour) const {
    auto wit = is_empty(product(behaviour, bad_));
    if (!wit) return {};
    return {false, wit->lasso.masked(arena_.env()).canonical()};
  }

  WinningVerdict check(const Transducer& s) const { return check(model_automaton(s)); }

 private:
  Arena arena_;
  BuchiAutomaton bad_;
};

/// Winning iff no admitted environment word makes the strategy violate f.
inline WinningVerdict check_winning(const FormulaPtr& f, const Transducer& s, const Arena& arena) {
  return WinningChecker(f, arena).check(s);
}

/// Precomputed per-priority automata for repeated dominance checks against
/// one spec and arena. Candidates are given as behaviour automata over
/// env() ∪ controlled (a transducer's model, or an annotated generator).
class DominanceChecker {
 public:
  DominanceChecker(PrioritizedSpec spec, Arena arena) : spec_(std::move(spec)), arena_(std::move(arena)) {
    // Only the one-hot groups the objectives, the outputs or a relevant plant
    // touch are constrained here; a total deterministic plant whose state
    // the objectives never mention cannot change any verdict.
    const bool plant_relevant = (spec_.atoms() & arena_.plant_outputs()) != 0;
    scope_ = spec_.atoms() | arena_.controlled;
    if (plant_relevant) scope_ |= arena_.plant->inputs | arena_.plant->outputs;
    if (arena_.assumption) scope_ |= arena_.assumption->alphabet;
    scope_ = arena_.one_hot.close(scope_);
    auto c = legality_automaton(arena_.one_hot, scope_);
    if (plant_relevant) c = product(model_automaton(*arena_.plant), c);
    for (std::size_t k = 1; k <= spec_.size(); ++k) {
      auto good = product(c, ltl_to_buchi(partial_conjunction(spec_, k)));
      auto ach = trim(project(good, arena_.env()));
      if (arena_.assumption) ach = trim(product(ach, *arena_.assumption));
      good_.push_back(trim(good));
      ach_.push_back(std::move(ach));
      bad_.push_back(trim(product(c, ltl_to_buchi(negate_nnf(partial_conjunction(spec_, k))))));
    }
  }

  const PrioritizedSpec& spec() const { return spec_; }
  const Arena& arena() const { return arena_; }

  DominanceVerdict check(const BuchiAutomaton& candidate) const {
    const VarSet extra = arena_.one_hot.close(candidate.alphabet) & ~scope_;
    const BuchiAutomaton behaviour =
        extra ? product(candidate, legality_automaton(arena_.one_hot, extra)) : candidate;
    for (std::size_t k = 1; k <= spec_.size(); ++k) {
      if (ach_[k - 1].size() == 0) continue;
      auto bad = trim(product(behaviour, bad_[k - 1]));
      if (bad.size() == 0) continue;
      auto both = product(ach_[k - 1], project(bad, arena_.env()));
      auto wit = is_empty(both);
      if (!wit) continue;
      Lasso gamma = fill_untouched(wit->lasso.masked(arena_.env()), scope_ | extra);
      auto own = is_empty(product(bad, lasso_automaton(gamma, arena_.env())));
      auto alt = is_empty(product(good_[k - 1], lasso_automaton(gamma, arena_.env())));
      if (!own || !alt) throw std::logic_error("dominance witness could not be reconstructed");
      Counterexample c;
      c.gamma = gamma.canonical();
      c.outputs = own->lasso.masked(arena_.controlled);
      c.better = alt->lasso.masked(arena_.controlled);
      c.k = achieved_priority_on_word(spec_, arena_.word(c.gamma, c.outputs));
      c.m = achieved_priority_on_word(spec_, arena_.word(c.gamma, c.better));
      return {false, c};
    }
    return {};
  }

  DominanceVerdict check(const Transducer& s) const {
    auto v = check(model_automaton(s));
    if (v.counterexample) {
      // The transducer's own run is unique on gamma.
      v.counterexample->outputs = arena_.run(s, v.counterexample->gamma).masked(arena_.controlled);
    }
    return v;
  }

 private:
  // One-hot groups outside `touched` are unconstrained in the automata;
  // their first member is made true so the word stays legal.
  Lasso fill_untouched(Lasso w, VarSet touched) const {
    Valuation fill = 0;
    for (VarSet g : arena_.one_hot.groups) {
      if (!(g & touched) && (g & arena_.env())) fill |= g & (~g + 1);
    }
    for (auto& v : w.stem) v |= fill;
    for (auto& v : w.loop) v |= fill;
    return w;
  }

  PrioritizedSpec spec_;
  Arena arena_;
  VarSet scope_ = 0;
  std::vector<BuchiAutomaton> good_;  // C ∩ A(phi^k)
  std::vector<BuchiAutomaton> ach_;   // project(good_k, env) ∩ assumption
  std::vector<BuchiAutomaton> bad_;   // C ∩ A(!phi^k)
};

inline DominanceVerdict check_dominant(const PrioritizedSpec& spec, const Transducer& s,
                                       const Arena& arena) {
  return DominanceChecker(spec, arena).check(s);
}

class BoundExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumerates every joint lasso (environment and outputs) of one shape with
/// stem <= max_stem and loop <= max_loop, and compares the best priority
/// reachable on each environment word with the candidate's. A verdict of
/// "dominant" only means no counterexample exists within the bounds.
inline DominanceVerdict brute_force_dominance(const PrioritizedSpec& spec, const Transducer& s,
                                              const Arena& arena, std::size_t max_stem,
                                              std::size_t max_loop) {
  const VarSet env = arena.env(), joint = env | arena.controlled;
  auto letters = arena.one_hot.letters(joint);
  double total = 0;
  for (std::size_t st = 0; st <= max_stem; ++st) {
    for (std::size_t lp = 1; lp <= max_loop; ++lp) {
      total += std::pow(static_cast<double>(letters.size()), static_cast<double>(st + lp));
    }
  }
  if (total > 2e7) throw BoundExceeded("brute-force enumeration exceeds 2e7 lassos");
  struct Best {
    std::size_t m = 0;
    Lasso outputs;
  };
  std::map<Lasso, Best> best;
  for_each_lasso(letters, max_stem, max_loop, [&](const Lasso& w) {
    Lasso gamma = w.masked(env).canonical();
    if (!arena.admits(gamma)) return;
    std::size_t m = achieved_priority_on_word(spec, arena.plant ? comp(*arena.plant, w) : w);
    auto [it, fresh] = best.try_emplace(gamma);
    if (fresh || m > it->second.m) it->second = {m, w.masked(arena.controlled)};
  });
  for (const auto& [gamma, b] : best) {
    Lasso run = arena.run(s, gamma);
    std::size_t k = achieved_priority_on_word(spec, run);
    if (b.m > k) return {false, Counterexample{gamma, run.masked(arena.controlled), b.outputs, k, b.m}};
  }
  return {};
}

/// Outcome of a bounded search; `transducer` is empty when nothing within
/// `bound` states passed.
struct SynthesisResult {
  std::optional<Transducer> transducer;
  int bound = 0;
  bool found() const { return transducer.has_value(); }
};

namespace detail {

// Depth-first enumeration of canonical transducers (states numbered in
// breadth-first order over legal input letters, all reachable), in
// lexicographic order of the slots (output of q, then q's transitions).
// A partial transducer is rejected when the check fails on its model with
// undefined transitions left out: the offending run is shared by every
// completion. Counterexamples (gamma, need) are cached, and each rejection
// records the slots its run on gamma used, so the search can jump back over
// slots that played no part in a conflict.
class Enumerator {
 public:
  using Check = std::function<std::optional<std::pair<Lasso, std::size_t>>(const BuchiAutomaton&)>;

  /// `accept`, when given, gets the last word on each complete candidate.
  Enumerator(const PrioritizedSpec& spec, const Arena& arena, VarSet inputs, Check check,
             std::function<bool(const Transducer&)> accept = {})
      : spec_(spec),
        arena_(arena),
        inputs_(inputs & ~arena.controlled),
        check_(std::move(check)),
        accept_(std::move(accept)) {
    out_letters_ = arena.one_hot.letters(arena.controlled);
    legal_index_.assign(std::size_t{1} << popcount(inputs_), -1);
    for (Valuation v : arena.one_hot.letters(inputs_)) {
      auto l = static_cast<std::size_t>(compress(v, inputs_));
      legal_index_[l] = static_cast<int>(legal_.size());
      legal_.push_back(l);
    }
  }

  std::optional<Transducer> run(int bound) {
    for (int n = 1; n <= bound; ++n) {
      t_ = Transducer::with_states(inputs_, arena_.controlled, n);
      for (auto& row : t_.next) {
        for (std::size_t l : legal_) row[l] = -1;
      }
      used_ = 0;
      has_output_.assign(n, 0);
      if (dfs(0).found) return t_;
    }
    return std::nullopt;
  }

  std::size_t checks() const { return checked_; }

 private:
  using Slots = std::vector<char>;
  struct Result {
    bool found = false;
    Slots conflict;
  };

  int width() const { return static_cast<int>(legal_.size()) + 1; }
  int slot_count() const { return t_.size() * width(); }

  Slots assigned_before(int slot, bool transitions_only) const {
    Slots s(static_cast<std::size_t>(slot_count()), 0);
    for (int k = 0; k < slot; ++k) {
      if (!transitions_only || k % width() != 0) s[k] = 1;
    }
    return s;
  }

  // Slot q * width() assigns q's output; the following ones q's transitions
  // on legal_[0], legal_[1], ...
  Result dfs(int slot) {
    const int n = t_.size();
    const int q = slot / width(), j = slot % width() - 1;
    if (q == n) {
      if (!accept_ || accept_(t_)) return {true, {}};
      return {false, assigned_before(slot, false)};
    }
    if (q > used_) return {false, assigned_before(slot, true)};  // unreachable state
    Slots conflict(static_cast<std::size_t>(slot_count()), 0);
    auto absorb = [&](const Slots& c) {
      for (std::size_t k = 0; k < c.size(); ++k) conflict[k] |= c[k];
    };
    if (j < 0) {
      has_output_[q] = 1;
      for (Valuation o : out_letters_) {
        t_.output[q] = o;
        Result r = dfs(slot + 1);
        if (r.found) return r;
        if (!r.conflict[slot]) {
          has_output_[q] = 0;
          return r;
        }
        absorb(r.conflict);
      }
      has_output_[q] = 0;
    } else {
      const std::size_t l = legal_[static_cast<std::size_t>(j)];
      const int saved = used_;
      const int top = std::min(used_ + 1, n - 1);
      for (int d = 0; d <= top; ++d) {
        t_.next[q][l] = d;
        used_ = std::max(saved, d);
        Result r;
        if (auto c = rejection()) {
          r.conflict = std::move(*c);
        } else {
          r = dfs(slot + 1);
          if (r.found) return r;
        }
        if (!r.conflict[slot]) {
          t_.next[q][l] = -1;
          used_ = saved;
          return r;
        }
        absorb(r.conflict);
      }
      t_.next[q][l] = -1;
      used_ = saved;
      // Fewer targets were available because of earlier transitions.
      if (top < n - 1) absorb(assigned_before(slot, true));
    }
    conflict[slot] = 0;
    return {false, std::move(conflict)};
  }

  // Slots of a determined run that falls short, or nothing.
  std::optional<Slots> rejection() {
    for (const auto& [gamma, need] : cache_) {
      if (auto c = conflict_of(gamma, need)) return c;
    }
    ++checked_;
    auto cex = check_(partial_model());
    if (!cex) return std::nullopt;
    cache_.push_back(std::move(*cex));
    if (auto c = conflict_of(cache_.back().first, cache_.back().second)) return c;
    return assigned_before(slot_count(), false);
  }

  BuchiAutomaton partial_model() const {
    BuchiAutomaton a;
    a.alphabet = t_.inputs | t_.outputs;
    for (int q = 0; q < t_.size(); ++q) a.add_state(true);
    a.initial = {t_.initial};
    for (int q = 0; q < t_.size(); ++q) {
      if (!has_output_[q]) continue;
      Cube out = Cube::letter(t_.output[q], t_.outputs);
      for (std::size_t l = 0; l < t_.letter_count(); ++l) {
        int d = t_.next[q][l];
        if (d < 0 || !has_output_[d]) continue;
        a.add_edge(q, out & Cube::letter(expand(l, t_.inputs), t_.inputs), d);
      }
    }
    return a;
  }

  // The slots used by the run on gamma if that run is fully assigned and
  // reaches a priority below `need`.
  std::optional<Slots> conflict_of(const Lasso& gamma, std::size_t need) const {
    const std::size_t stem = gamma.stem.size(), period = gamma.loop.size();
    std::map<std::tuple<int, int, std::size_t>, std::size_t> seen;
    std::vector<Valuation> letters;
    Slots used(static_cast<std::size_t>(slot_count()), 0);
    int q = t_.initial, p = arena_.plant ? arena_.plant->initial : 0;
    for (std::size_t i = 0;; ++i) {
      if (!has_output_[q]) return std::nullopt;
      used[static_cast<std::size_t>(q * width())] = 1;
      if (i >= stem) {
        auto key = std::make_tuple(q, p, (i - stem) % period);
        auto it = seen.find(key);
        if (it != seen.end()) {
          Lasso w;
          w.stem.assign(letters.begin(), letters.begin() + static_cast<long>(it->second));
          w.loop.assign(letters.begin() + static_cast<long>(it->second), letters.end());
          if (achieved_priority_on_word(spec_, w) >= need) return std::nullopt;
          return used;
        }
        seen.emplace(key, i);
      }
      Valuation letter = (gamma.at(i) & arena_.env()) | t_.output[q];
      if (arena_.plant) letter |= arena_.plant->output[p];
      letters.push_back(letter);
      auto l = static_cast<std::size_t>(compress(letter & inputs_, inputs_));
      int nq = t_.next[q][l];
      if (nq < 0) return std::nullopt;
      if (legal_index_[l] >= 0) used[static_cast<std::size_t>(q * width() + 1 + legal_index_[l])] = 1;
      if (arena_.plant) p = arena_.plant->step(p, letter);
      q = nq;
    }
  }

  const PrioritizedSpec& spec_;
  const Arena& arena_;
  VarSet inputs_;
  Check check_;
  std::function<bool(const Transducer&)> accept_;
  std::vector<Valuation> out_letters_;
  std::vector<std::size_t> legal_;
  std::vector<int> legal_index_;
  std::vector<std::pair<Lasso, std::size_t>> cache_;
  Transducer t_;
  std::vector<char> has_output_;
  int used_ = 0;
  std::size_t checked_ = 0;
};

}  // namespace detail

/// First canonical transducer with at most `bound` states, reading `inputs`,
/// that wins f.
inline SynthesisResult synthesize_winning_bounded(const FormulaPtr& f, const Arena& arena,
                                                  VarSet inputs, int bound) {
  if (bound < 1) throw std::invalid_argument("state bound must be at least 1");
  PrioritizedSpec spec{{f}};
  WinningChecker checker(f, arena);
  detail::Enumerator e(spec, arena, inputs, [&](const BuchiAutomaton& b) -> std::optional<std::pair<Lasso, std::size_t>> {
    auto v = checker.check(b);
    if (v.winning) return std::nullopt;
    return std::make_pair(*v.gamma, std::size_t{1});
  });
  return {e.run(bound), bound};
}

/// First canonical transducer with at most `bound` states, reading `inputs`,
/// that is dominant for the spec. An empty result says nothing about
/// larger bounds.
inline SynthesisResult synthesize_dominant_bounded(const PrioritizedSpec& spec, const Arena& arena,
                                                   VarSet inputs, int bound) {
  if (bound < 1) throw std::invalid_argument("state bound must be at least 1");
  DominanceChecker checker(spec, arena);
  detail::Enumerator e(spec, arena, inputs, [&](const BuchiAutomaton& b) -> std::optional<std::pair<Lasso, std::size_t>> {
    auto v = checker.check(b);
    if (v.dominant) return std::nullopt;
    return std::make_pair(v.counterexample->gamma, v.counterexample->m);
  });
  return {e.run(bound), bound};
}

}  // namespace domsyn
