#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace domsyn {

/// Set of variables as a bitmask over the indices of a Universe.
using VarSet = std::uint64_t;
/// The variables assigned true; everything else is false.
using Valuation = std::uint64_t;

constexpr int kMaxVars = 64;

inline VarSet bit(int index) { return VarSet{1} << index; }
inline int popcount(VarSet s) { return std::popcount(s); }
inline bool subset_of(VarSet a, VarSet b) { return (a & ~b) == 0; }

/// Packs the bits of `v` selected by `mask` into the low bits (software pext).
inline std::uint64_t compress(Valuation v, VarSet mask) {
  std::uint64_t out = 0;
  int k = 0;
  for (VarSet m = mask; m != 0; m &= m - 1, ++k) {
    if (v & (m & -m)) out |= std::uint64_t{1} << k;
  }
  return out;
}

/// Inverse of compress: spreads the low bits of `packed` onto `mask`.
inline Valuation expand(std::uint64_t packed, VarSet mask) {
  Valuation out = 0;
  int k = 0;
  for (VarSet m = mask; m != 0; m &= m - 1, ++k) {
    if (packed & (std::uint64_t{1} << k)) out |= (m & -m);
  }
  return out;
}

class VarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Declared variable names. Indices are assigned in declaration order.
class Universe {
 public:
  Universe() = default;
  explicit Universe(const std::vector<std::string>& names) {
    for (const auto& n : names) add(n);
  }

  int add(const std::string& name) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    if (static_cast<int>(names_.size()) >= kMaxVars) {
      throw VarError("too many variables (limit 64)");
    }
    names_.push_back(name);
    index_.emplace(name, static_cast<int>(names_.size()) - 1);
    return static_cast<int>(names_.size()) - 1;
  }

  int size() const { return static_cast<int>(names_.size()); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  int index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw VarError("unknown variable '" + name + "'");
    return it->second;
  }

  const std::string& name(int i) const { return names_.at(i); }
  VarSet all() const { return size() == 64 ? ~VarSet{0} : bit(size()) - 1; }

  VarSet set_of(const std::vector<std::string>& names) const {
    VarSet s = 0;
    for (const auto& n : names) s |= bit(index(n));
    return s;
  }

  std::vector<std::string> names_in(VarSet s) const {
    std::vector<std::string> out;
    for (int i = 0; i < size(); ++i) {
      if (s & bit(i)) out.push_back(names_[i]);
    }
    return out;
  }

  /// `{a,b}` with names in index order; `{}` for the empty letter.
  std::string format(Valuation v) const {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < size(); ++i) {
      if (!(v & bit(i))) continue;
      if (!first) out += ",";
      out += names_[i];
      first = false;
    }
    return out + "}";
  }

  /// Parses `{a,b}`; `pos` is advanced past the closing brace.
  Valuation parse_letter(std::string_view text, std::size_t& pos) const {
    auto skip = [&] {
      while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    };
    skip();
    if (pos >= text.size() || text[pos] != '{') {
      throw VarError("expected '{' at offset " + std::to_string(pos));
    }
    ++pos;
    Valuation v = 0;
    for (;;) {
      skip();
      if (pos < text.size() && text[pos] == '}') {
        ++pos;
        return v;
      }
      std::size_t start = pos;
      while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                   text[pos] == '_')) {
        ++pos;
      }
      if (start == pos) throw VarError("malformed letter near offset " + std::to_string(pos));
      v |= bit(index(std::string(text.substr(start, pos - start))));
      skip();
      if (pos < text.size() && text[pos] == ',') ++pos;
    }
  }

  Valuation parse_letter(std::string_view text) const {
    std::size_t pos = 0;
    Valuation v = parse_letter(text, pos);
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos != text.size()) throw VarError("trailing characters after letter");
    return v;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

using UniversePtr = std::shared_ptr<const Universe>;

/// Exactly-one constraints over groups of variables (e.g. accel/keep/decel).
struct OneHot {
  std::vector<VarSet> groups;

  /// A group fully inside `scope` must have exactly one true member; a group
  /// partially inside it must have at most one.
  bool legal(Valuation v, VarSet scope) const {
    for (VarSet g : groups) {
      VarSet inside = g & scope;
      if (inside == 0) continue;
      int n = popcount(v & inside);
      if (inside == g ? n != 1 : n > 1) return false;
    }
    return true;
  }

  /// Smallest superset of `vars` that contains every group it touches.
  VarSet close(VarSet vars) const {
    VarSet out = vars;
    for (VarSet g : groups) {
      if (g & vars) out |= g;
    }
    return out;
  }

  /// All legal valuations over `scope`, in increasing numeric order.
  std::vector<Valuation> letters(VarSet scope) const {
    std::vector<Valuation> out;
    if (popcount(scope) > 20) throw VarError("letter enumeration over more than 20 variables");
    std::uint64_t n = std::uint64_t{1} << popcount(scope);
    for (std::uint64_t k = 0; k < n; ++k) {
      Valuation v = expand(k, scope);
      if (legal(v, scope)) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

}  // namespace domsyn
