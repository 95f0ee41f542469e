#pragma once

#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "domsyn/vars.hpp"

namespace domsyn {

/// The ultimately periodic word stem · loop^ω.
struct Lasso {
  std::vector<Valuation> stem;
  std::vector<Valuation> loop;

  std::size_t positions() const { return stem.size() + loop.size(); }

  /// Letter at position i of the infinite word.
  Valuation at(std::size_t i) const {
    if (i < stem.size()) return stem[i];
    return loop[(i - stem.size()) % loop.size()];
  }

  /// Successor of a position in the finite (stem + loop) graph.
  std::size_t next(std::size_t i) const {
    return i + 1 < positions() ? i + 1 : stem.size();
  }

  Lasso masked(VarSet keep) const {
    Lasso out;
    for (Valuation v : stem) out.stem.push_back(v & keep);
    for (Valuation v : loop) out.loop.push_back(v & keep);
    return out;
  }

  /// Unique representation of the infinite word: primitive loop, shortest stem.
  Lasso canonical() const {
    Lasso out = *this;
    const std::size_t n = out.loop.size();
    for (std::size_t p = 1; p <= n; ++p) {
      if (n % p != 0) continue;
      bool periodic = true;
      for (std::size_t i = p; i < n && periodic; ++i) periodic = out.loop[i] == out.loop[i - p];
      if (periodic) {
        out.loop.resize(p);
        break;
      }
    }
    while (!out.stem.empty() && out.stem.back() == out.loop.back()) {
      out.loop.insert(out.loop.begin(), out.loop.back());
      out.loop.pop_back();
      out.stem.pop_back();
    }
    return out;
  }

  /// Same infinite word, unrolled to the given stem length and a loop length
  /// that is a multiple of the current one.
  Lasso unrolled(std::size_t stem_len, std::size_t loop_len) const {
    Lasso out;
    for (std::size_t i = 0; i < stem_len; ++i) out.stem.push_back(at(i));
    for (std::size_t i = 0; i < loop_len; ++i) out.loop.push_back(at(stem_len + i));
    return out;
  }

  friend bool operator==(const Lasso&, const Lasso&) = default;
  friend auto operator<=>(const Lasso&, const Lasso&) = default;
};

/// Two words on a common shape: stem = max, loop = lcm.
inline std::pair<Lasso, Lasso> align(const Lasso& a, const Lasso& b) {
  std::size_t stem = std::max(a.stem.size(), b.stem.size());
  std::size_t loop = std::lcm(a.loop.size(), b.loop.size());
  return {a.unrolled(stem, loop), b.unrolled(stem, loop)};
}

/// Pointwise union of two words (over disjoint variables in practice).
inline Lasso merge(const Lasso& a, const Lasso& b) {
  auto [x, y] = align(a, b);
  for (std::size_t i = 0; i < x.stem.size(); ++i) x.stem[i] |= y.stem[i];
  for (std::size_t i = 0; i < x.loop.size(); ++i) x.loop[i] |= y.loop[i];
  return x;
}

inline bool same_word(const Lasso& a, const Lasso& b) { return a.canonical() == b.canonical(); }

/// `stem;loop` with letters written as `{a,b}` groups, optionally separated
/// by commas or spaces.
inline std::string format_lasso(const Universe& u, const Lasso& w) {
  std::string out;
  for (Valuation v : w.stem) out += u.format(v);
  out += ";";
  for (Valuation v : w.loop) out += u.format(v);
  return out;
}

inline Lasso parse_lasso(const Universe& u, std::string_view text) {
  auto semi = text.find(';');
  if (semi == std::string_view::npos) throw VarError("lasso needs 'stem;loop'");
  auto letters = [&](std::string_view part) {
    std::vector<Valuation> out;
    std::size_t pos = 0;
    for (;;) {
      while (pos < part.size() && (part[pos] == ' ' || part[pos] == ',')) ++pos;
      if (pos >= part.size()) break;
      out.push_back(u.parse_letter(part, pos));
    }
    return out;
  };
  Lasso w{letters(text.substr(0, semi)), letters(text.substr(semi + 1))};
  if (w.loop.empty()) throw VarError("lasso loop must be nonempty");
  return w;
}

/// Every lasso with stem length <= max_stem and loop length in [1, max_loop]
/// over the given letters. Callers pick small bounds; the count is
/// sum(|L|^s) * sum(|L|^l).
template <typename Visit>
void for_each_lasso(const std::vector<Valuation>& alphabet, std::size_t max_stem,
                    std::size_t max_loop, Visit&& visit) {
  auto words = [&](std::size_t len, auto&& body) {
    std::vector<std::size_t> idx(len, 0);
    std::vector<Valuation> word(len);
    for (;;) {
      for (std::size_t i = 0; i < len; ++i) word[i] = alphabet[idx[i]];
      body(word);
      std::size_t k = 0;
      while (k < len && ++idx[k] == alphabet.size()) idx[k++] = 0;
      if (k == len) return;
    }
  };
  if (alphabet.empty()) return;
  Lasso w;
  for (std::size_t s = 0; s <= max_stem; ++s) {
    words(s, [&](const std::vector<Valuation>& stem) {
      for (std::size_t l = 1; l <= max_loop; ++l) {
        words(l, [&](const std::vector<Valuation>& loop) {
          w.stem = stem;
          w.loop = loop;
          visit(static_cast<const Lasso&>(w));
        });
      }
    });
  }
}

}  // namespace domsyn
