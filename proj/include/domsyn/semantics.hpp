#pragma once

#include <stdexcept>
#include <vector>

#include "domsyn/lasso.hpp"
#include "domsyn/ltl.hpp"

namespace domsyn {

namespace detail {

inline FormulaPtr nnf(const FormulaPtr& f, bool negated) {
  using namespace ltl;
  switch (f->op()) {
    case Op::kTrue: return negated ? ff() : f;
    case Op::kFalse: return negated ? tt() : f;
    case Op::kAtom: return negated ? neg(f) : f;
    case Op::kNot: return nnf(f->child(), !negated);
    case Op::kAnd:
      return negated ? disj(nnf(f->lhs(), true), nnf(f->rhs(), true))
                     : conj(nnf(f->lhs(), false), nnf(f->rhs(), false));
    case Op::kOr:
      return negated ? conj(nnf(f->lhs(), true), nnf(f->rhs(), true))
                     : disj(nnf(f->lhs(), false), nnf(f->rhs(), false));
    case Op::kImplies:
      return negated ? conj(nnf(f->lhs(), false), nnf(f->rhs(), true))
                     : disj(nnf(f->lhs(), true), nnf(f->rhs(), false));
    case Op::kIff: {
      auto a = nnf(f->lhs(), false), na = nnf(f->lhs(), true);
      auto b = nnf(f->rhs(), false), nb = nnf(f->rhs(), true);
      return negated ? disj(conj(a, nb), conj(na, b)) : disj(conj(a, b), conj(na, nb));
    }
    case Op::kNext: return next(nnf(f->child(), negated));
    case Op::kEventually:
      return negated ? globally(nnf(f->child(), true)) : eventually(nnf(f->child(), false));
    case Op::kGlobally:
      return negated ? eventually(nnf(f->child(), true)) : globally(nnf(f->child(), false));
    case Op::kUntil:
      return negated ? release(nnf(f->lhs(), true), nnf(f->rhs(), true))
                     : until(nnf(f->lhs(), false), nnf(f->rhs(), false));
    case Op::kRelease:
      return negated ? until(nnf(f->lhs(), true), nnf(f->rhs(), true))
                     : release(nnf(f->lhs(), false), nnf(f->rhs(), false));
  }
  throw std::logic_error("nnf: unhandled operator");
}

}  // namespace detail

/// Negation normal form: only atoms are negated; -> and <-> are expanded.
inline FormulaPtr to_nnf(const FormulaPtr& f) { return detail::nnf(f, false); }

/// NNF of !f, using the X/F-G/U-R dualities.
inline FormulaPtr negate_nnf(const FormulaPtr& f) { return detail::nnf(f, true); }

inline bool is_nnf(const FormulaPtr& f) {
  switch (f->op()) {
    case Op::kNot: return f->child()->op() == Op::kAtom;
    case Op::kImplies:
    case Op::kIff: return false;
    default: break;
  }
  return (!f->lhs() || is_nnf(f->lhs())) && (!f->rhs() || is_nnf(f->rhs()));
}

namespace detail {

// Truth of every subformula at each position of the lasso's (stem + loop)
// graph, children before parents, in one buffer of n-position rows.
class LassoEvaluator {
 public:
  explicit LassoEvaluator(const Lasso& w) : w_(w), n_(w.positions()), loop_start_(w.stem.size()) {
    rows_.reserve(n_ * 8);
  }

  bool at_start(const Formula& f) {
    rows_.clear();
    return row(f)[0] != 0;
  }

 private:
  // Returns the offset of f's row in rows_.
  std::size_t eval(const Formula& f) {
    std::size_t a = 0, b = 0;
    if (f.lhs()) a = eval(*f.lhs());
    if (f.rhs()) b = eval(*f.rhs());
    const std::size_t out = rows_.size();
    rows_.resize(out + n_, 0);
    char* v = &rows_[out];
    const char* x = &rows_[a];
    const char* y = &rows_[b];
    auto fixpoint = [&](auto&& step) {
      for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = n_; k-- > 0;) {
          char nv = step(k);
          if (nv != v[k]) {
            v[k] = nv;
            changed = true;
          }
        }
      }
    };
    switch (f.op()) {
      case Op::kTrue: std::fill(v, v + n_, 1); break;
      case Op::kFalse: break;
      case Op::kAtom:
        for (std::size_t i = 0; i < n_; ++i) v[i] = (w_.at(i) & bit(f.atom())) != 0;
        break;
      case Op::kNot:
        for (std::size_t i = 0; i < n_; ++i) v[i] = !x[i];
        break;
      case Op::kAnd:
        for (std::size_t i = 0; i < n_; ++i) v[i] = x[i] && y[i];
        break;
      case Op::kOr:
        for (std::size_t i = 0; i < n_; ++i) v[i] = x[i] || y[i];
        break;
      case Op::kImplies:
        for (std::size_t i = 0; i < n_; ++i) v[i] = !x[i] || y[i];
        break;
      case Op::kIff:
        for (std::size_t i = 0; i < n_; ++i) v[i] = x[i] == y[i];
        break;
      case Op::kNext:
        for (std::size_t i = 0; i < n_; ++i) v[i] = x[next(i)];
        break;
      case Op::kEventually:
        fixpoint([&](std::size_t i) -> char { return x[i] || v[next(i)]; });
        break;
      case Op::kGlobally:
        std::fill(v, v + n_, 1);
        fixpoint([&](std::size_t i) -> char { return x[i] && v[next(i)]; });
        break;
      case Op::kUntil:
        fixpoint([&](std::size_t i) -> char { return y[i] || (x[i] && v[next(i)]); });
        break;
      case Op::kRelease:
        std::fill(v, v + n_, 1);
        fixpoint([&](std::size_t i) -> char { return y[i] && (x[i] || v[next(i)]); });
        break;
    }
    return out;
  }

  const char* row(const Formula& f) { return &rows_[eval(f)]; }
  std::size_t next(std::size_t i) const { return i + 1 < n_ ? i + 1 : loop_start_; }

  const Lasso& w_;
  std::size_t n_, loop_start_;
  std::vector<char> rows_;
};

}  // namespace detail

/// Standard LTL semantics of f on stem·loop^ω, evaluated at position 0.
/// Until/eventually are least fixpoints and release/globally greatest
/// fixpoints over the finite position graph.
inline bool evaluate_on_lasso(const FormulaPtr& f, const Lasso& w) {
  if (w.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  return detail::LassoEvaluator(w).at_start(*f);
}

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered objectives; index 0 is the most important (priority 1).
struct PrioritizedSpec {
  std::vector<FormulaPtr> objectives;

  std::size_t size() const { return objectives.size(); }

  VarSet atoms() const {
    VarSet s = 0;
    for (const auto& f : objectives) s |= f->atoms();
    return s;
  }
};

/// Conjunction of the k most important objectives; k = 0 gives true.
inline FormulaPtr partial_conjunction(const PrioritizedSpec& spec, std::size_t k) {
  if (k > spec.size()) {
    throw SpecError("priority " + std::to_string(k) + " exceeds " + std::to_string(spec.size()) +
                    " objectives");
  }
  if (k == 0) return ltl::tt();
  FormulaPtr f = spec.objectives[0];
  for (std::size_t i = 1; i < k; ++i) f = ltl::conj(f, spec.objectives[i]);
  return f;
}

/// Largest k such that the word satisfies the k most important objectives.
inline std::size_t achieved_priority_on_word(const PrioritizedSpec& spec, const Lasso& w) {
  std::size_t k = 0;
  while (k < spec.size() && evaluate_on_lasso(spec.objectives[k], w)) ++k;
  return k;
}

}  // namespace domsyn
