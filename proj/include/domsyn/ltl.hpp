#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "domsyn/vars.hpp"

namespace domsyn {

enum class Op {
  kTrue,
  kFalse,
  kAtom,
  kNot,
  kAnd,
  kOr,
  kImplies,
  kIff,
  kNext,
  kEventually,
  kGlobally,
  kUntil,
  kRelease,
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable LTL syntax tree node. Atoms refer to Universe indices.
class Formula {
 public:
  Formula(Op op, int atom, FormulaPtr lhs, FormulaPtr rhs)
      : op_(op), atom_(atom), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

  Op op() const { return op_; }
  int atom() const { return atom_; }
  const FormulaPtr& lhs() const { return lhs_; }
  const FormulaPtr& rhs() const { return rhs_; }
  /// Operand of a unary operator.
  const FormulaPtr& child() const { return lhs_; }

  bool is_unary() const {
    return op_ == Op::kNot || op_ == Op::kNext || op_ == Op::kEventually || op_ == Op::kGlobally;
  }
  bool is_binary() const { return lhs_ && rhs_; }

  int depth() const {
    int d = 0;
    if (lhs_) d = std::max(d, lhs_->depth());
    if (rhs_) d = std::max(d, rhs_->depth());
    return (op_ == Op::kAtom || op_ == Op::kTrue || op_ == Op::kFalse) ? 0 : d + 1;
  }

  VarSet atoms() const {
    VarSet s = op_ == Op::kAtom ? bit(atom_) : 0;
    if (lhs_) s |= lhs_->atoms();
    if (rhs_) s |= rhs_->atoms();
    return s;
  }

 private:
  Op op_;
  int atom_;
  FormulaPtr lhs_;
  FormulaPtr rhs_;
};

inline bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op() != b->op() || a->atom() != b->atom()) return false;
  return equal(a->lhs(), b->lhs()) && equal(a->rhs(), b->rhs());
}

namespace ltl {

inline FormulaPtr make(Op op, FormulaPtr l = nullptr, FormulaPtr r = nullptr) {
  return std::make_shared<const Formula>(op, -1, std::move(l), std::move(r));
}
inline FormulaPtr tt() { return make(Op::kTrue); }
inline FormulaPtr ff() { return make(Op::kFalse); }
inline FormulaPtr atom(int index) {
  return std::make_shared<const Formula>(Op::kAtom, index, nullptr, nullptr);
}
inline FormulaPtr neg(FormulaPtr f) { return make(Op::kNot, std::move(f)); }
inline FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return make(Op::kAnd, std::move(a), std::move(b)); }
inline FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return make(Op::kOr, std::move(a), std::move(b)); }
inline FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
  return make(Op::kImplies, std::move(a), std::move(b));
}
inline FormulaPtr iff(FormulaPtr a, FormulaPtr b) { return make(Op::kIff, std::move(a), std::move(b)); }
inline FormulaPtr next(FormulaPtr f) { return make(Op::kNext, std::move(f)); }
inline FormulaPtr eventually(FormulaPtr f) { return make(Op::kEventually, std::move(f)); }
inline FormulaPtr globally(FormulaPtr f) { return make(Op::kGlobally, std::move(f)); }
inline FormulaPtr until(FormulaPtr a, FormulaPtr b) { return make(Op::kUntil, std::move(a), std::move(b)); }
inline FormulaPtr release(FormulaPtr a, FormulaPtr b) {
  return make(Op::kRelease, std::move(a), std::move(b));
}

}  // namespace ltl

namespace detail {

// Binding strength, higher binds tighter.
inline int precedence(Op op) {
  switch (op) {
    case Op::kIff: return 1;
    case Op::kImplies: return 2;
    case Op::kOr: return 3;
    case Op::kAnd: return 4;
    case Op::kUntil:
    case Op::kRelease: return 5;
    case Op::kNot:
    case Op::kNext:
    case Op::kEventually:
    case Op::kGlobally: return 6;
    default: return 7;
  }
}

inline bool right_assoc(Op op) {
  return op == Op::kImplies || op == Op::kUntil || op == Op::kRelease;
}

inline const char* symbol(Op op) {
  switch (op) {
    case Op::kNot: return "!";
    case Op::kNext: return "X ";
    case Op::kEventually: return "F ";
    case Op::kGlobally: return "G ";
    case Op::kAnd: return " & ";
    case Op::kOr: return " | ";
    case Op::kImplies: return " -> ";
    case Op::kIff: return " <-> ";
    case Op::kUntil: return " U ";
    case Op::kRelease: return " R ";
    default: return "";
  }
}

inline void print(const Universe& u, const FormulaPtr& f, std::string& out) {
  auto wrap = [&](const FormulaPtr& g, bool parens) {
    if (parens) out += "(";
    print(u, g, out);
    if (parens) out += ")";
  };
  switch (f->op()) {
    case Op::kTrue: out += "true"; return;
    case Op::kFalse: out += "false"; return;
    case Op::kAtom: out += u.name(f->atom()); return;
    default: break;
  }
  const int p = precedence(f->op());
  if (f->is_unary()) {
    out += symbol(f->op());
    wrap(f->child(), precedence(f->child()->op()) < p);
    return;
  }
  const int pl = precedence(f->lhs()->op());
  const int pr = precedence(f->rhs()->op());
  const bool ra = right_assoc(f->op());
  wrap(f->lhs(), ra ? pl <= p : pl < p);
  out += symbol(f->op());
  wrap(f->rhs(), ra ? pr < p : pr <= p);
}

}  // namespace detail

/// Minimal-parenthesis rendering in the concrete syntax accepted by parse_ltl.
inline std::string to_string(const Universe& u, const FormulaPtr& f) {
  std::string out;
  detail::print(u, f, out);
  return out;
}

class LtlSyntaxError : public std::runtime_error {
 public:
  LtlSyntaxError(const std::string& what, int line, int column)
      : std::runtime_error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class UnknownAtomError : public std::runtime_error {
 public:
  explicit UnknownAtomError(const std::string& name)
      : std::runtime_error("unknown atom '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

namespace detail {

class LtlParser {
 public:
  LtlParser(std::string_view text, const Universe& u) : text_(text), u_(u) { advance(); }

  FormulaPtr parse() {
    FormulaPtr f = parse_iff();
    if (tok_.kind != Tok::kEnd) fail("unexpected '" + tok_.text + "'");
    return f;
  }

 private:
  enum class Tok { kEnd, kIdent, kLParen, kRParen, kNot, kAnd, kOr, kImplies, kIff };
  struct Token {
    Tok kind = Tok::kEnd;
    std::string text;
    int line = 1;
    int column = 1;
  };

  [[noreturn]] void fail(const std::string& msg) const {
    throw LtlSyntaxError(msg, tok_.line, tok_.column);
  }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
    tok_ = Token{};
    tok_.line = line_;
    tok_.column = static_cast<int>(pos_ - line_start_) + 1;
    if (pos_ >= text_.size()) return;
    auto rest = text_.substr(pos_);
    auto take = [&](Tok k, std::size_t n) {
      tok_.kind = k;
      tok_.text = std::string(rest.substr(0, n));
      pos_ += n;
    };
    char c = rest[0];
    if (rest.starts_with("<->")) return take(Tok::kIff, 3);
    if (rest.starts_with("->")) return take(Tok::kImplies, 2);
    if (c == '(') return take(Tok::kLParen, 1);
    if (c == ')') return take(Tok::kRParen, 1);
    if (c == '!') return take(Tok::kNot, 1);
    if (c == '&') return take(Tok::kAnd, 1);
    if (c == '|') return take(Tok::kOr, 1);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t n = 1;
      while (n < rest.size() &&
             (std::isalnum(static_cast<unsigned char>(rest[n])) || rest[n] == '_')) {
        ++n;
      }
      return take(Tok::kIdent, n);
    }
    tok_.text = std::string(1, c);
    fail("unexpected character '" + tok_.text + "'");
  }

  bool ident(const char* word) const { return tok_.kind == Tok::kIdent && tok_.text == word; }

  FormulaPtr parse_iff() {
    FormulaPtr lhs = parse_implies();
    while (tok_.kind == Tok::kIff) {
      advance();
      lhs = ltl::iff(lhs, parse_implies());
    }
    return lhs;
  }

  FormulaPtr parse_implies() {
    FormulaPtr lhs = parse_or();
    if (tok_.kind == Tok::kImplies) {
      advance();
      return ltl::implies(lhs, parse_implies());
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    while (tok_.kind == Tok::kOr) {
      advance();
      lhs = ltl::disj(lhs, parse_and());
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_until();
    while (tok_.kind == Tok::kAnd) {
      advance();
      lhs = ltl::conj(lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_unary();
    if (ident("U")) {
      advance();
      return ltl::until(lhs, parse_until());
    }
    if (ident("R")) {
      advance();
      return ltl::release(lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    if (tok_.kind == Tok::kNot) {
      advance();
      return ltl::neg(parse_unary());
    }
    if (ident("X")) {
      advance();
      return ltl::next(parse_unary());
    }
    if (ident("F")) {
      advance();
      return ltl::eventually(parse_unary());
    }
    if (ident("G")) {
      advance();
      return ltl::globally(parse_unary());
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    if (tok_.kind == Tok::kLParen) {
      advance();
      FormulaPtr f = parse_iff();
      if (tok_.kind != Tok::kRParen) fail("expected ')'");
      advance();
      return f;
    }
    if (tok_.kind == Tok::kIdent) {
      if (ident("U") || ident("R")) fail("missing left operand of '" + tok_.text + "'");
      std::string name = tok_.text;
      advance();
      if (name == "true") return ltl::tt();
      if (name == "false") return ltl::ff();
      if (!u_.contains(name)) throw UnknownAtomError(name);
      return ltl::atom(u_.index(name));
    }
    if (tok_.kind == Tok::kEnd) fail("unexpected end of input");
    fail("unexpected '" + tok_.text + "'");
  }

  std::string_view text_;
  const Universe& u_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  Token tok_;
};

}  // namespace detail

/// Parses the ASCII LTL syntax. Precedence from tightest: unary (! X F G),
/// U/R (right assoc), &, |, -> (right assoc), <->.
inline FormulaPtr parse_ltl(std::string_view text, const Universe& u) {
  return detail::LtlParser(text, u).parse();
}

}  // namespace domsyn
