#pragma once

// Test-only reference implementations, kept independent of the library's
// evaluation and automata code paths.

#include <random>
#include <vector>

#include "domsyn/buchi.hpp"
#include "domsyn/lasso.hpp"
#include "domsyn/ltl.hpp"

namespace oracle {

using namespace domsyn;

/// Direct semantics by unrolling: beyond stem + loop positions the word
/// repeats, so every temporal quantifier looks at most that far ahead.
inline bool sat(const FormulaPtr& f, const Lasso& w, std::size_t i) {
  const std::size_t horizon = w.positions();
  auto norm = [&](std::size_t j) {
    return j < w.stem.size() ? j : w.stem.size() + (j - w.stem.size()) % w.loop.size();
  };
  i = norm(i);
  switch (f->op()) {
    case Op::kTrue: return true;
    case Op::kFalse: return false;
    case Op::kAtom: return (w.at(i) & bit(f->atom())) != 0;
    case Op::kNot: return !sat(f->child(), w, i);
    case Op::kAnd: return sat(f->lhs(), w, i) && sat(f->rhs(), w, i);
    case Op::kOr: return sat(f->lhs(), w, i) || sat(f->rhs(), w, i);
    case Op::kImplies: return !sat(f->lhs(), w, i) || sat(f->rhs(), w, i);
    case Op::kIff: return sat(f->lhs(), w, i) == sat(f->rhs(), w, i);
    case Op::kNext: return sat(f->child(), w, i + 1);
    case Op::kEventually:
      for (std::size_t j = i; j <= i + horizon; ++j) {
        if (sat(f->child(), w, j)) return true;
      }
      return false;
    case Op::kGlobally:
      for (std::size_t j = i; j <= i + horizon; ++j) {
        if (!sat(f->child(), w, j)) return false;
      }
      return true;
    case Op::kUntil:
      for (std::size_t j = i; j <= i + horizon; ++j) {
        if (sat(f->rhs(), w, j)) return true;
        if (!sat(f->lhs(), w, j)) return false;
      }
      return false;
    case Op::kRelease:
      for (std::size_t j = i; j <= i + horizon; ++j) {
        if (!sat(f->rhs(), w, j)) return false;
        if (sat(f->lhs(), w, j)) return true;
      }
      return true;
  }
  return false;
}

inline bool sat(const FormulaPtr& f, const Lasso& w) { return sat(f, w, 0); }

/// Random formula over atoms 0..nvars-1 with depth at most `depth`.
inline FormulaPtr random_formula(std::mt19937& rng, int nvars, int depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  if (depth == 0 || pick(rng) < 20) {
    int r = pick(rng);
    if (r < 8) return ltl::tt();
    if (r < 12) return ltl::ff();
    return ltl::atom(std::uniform_int_distribution<int>(0, nvars - 1)(rng));
  }
  static const Op ops[] = {Op::kNot,     Op::kAnd,        Op::kOr,       Op::kImplies, Op::kIff,
                           Op::kNext,    Op::kEventually, Op::kGlobally, Op::kUntil,   Op::kRelease};
  Op op = ops[std::uniform_int_distribution<int>(0, 9)(rng)];
  auto sub = [&] { return random_formula(rng, nvars, depth - 1); };
  switch (op) {
    case Op::kNot:
    case Op::kNext:
    case Op::kEventually:
    case Op::kGlobally: return ltl::make(op, sub());
    default: {
      auto l = sub();
      return ltl::make(op, l, sub());
    }
  }
}

/// Every valuation over the first `nvars` variables.
inline std::vector<Valuation> full_alphabet(int nvars) {
  std::vector<Valuation> out;
  for (Valuation v = 0; v < (Valuation{1} << nvars); ++v) out.push_back(v);
  return out;
}

inline Lasso random_lasso(std::mt19937& rng, int nvars, int max_stem, int max_loop) {
  Lasso w;
  int s = std::uniform_int_distribution<int>(0, max_stem)(rng);
  int l = std::uniform_int_distribution<int>(1, max_loop)(rng);
  std::uniform_int_distribution<Valuation> letter(0, (Valuation{1} << nvars) - 1);
  for (int i = 0; i < s; ++i) w.stem.push_back(letter(rng));
  for (int i = 0; i < l; ++i) w.loop.push_back(letter(rng));
  return w;
}

/// Büchi membership by transitive closure over (state, position) pairs: some
/// accepting pair is reachable from an initial pair and lies on a cycle.
inline bool buchi_accepts(const BuchiAutomaton& a, const Lasso& w) {
  const std::size_t p = w.positions(), n = static_cast<std::size_t>(a.size()) * p;
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int q = 0; q < a.size(); ++q) {
    for (std::size_t i = 0; i < p; ++i) {
      for (const auto& e : a.edges[q]) {
        if (e.guard.holds(w.at(i))) reach[q * p + i][e.dst * p + w.next(i)] = 1;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = 1;
      }
    }
  }
  for (int q0 : a.initial) {
    std::size_t s = static_cast<std::size_t>(q0) * p;
    for (std::size_t t = 0; t < n; ++t) {
      if (!a.accepting[t / p] || !reach[t][t]) continue;
      if (t == s || reach[s][t]) return true;
    }
  }
  return false;
}

}  // namespace oracle
