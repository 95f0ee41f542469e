#pragma once

// Line-oriented spec files:
//
//   [architecture]
//   vars a b c
//   process NAME inputs a b outputs c
//   onehot a b
//   plant s
//
//   [world]
//   own a
//   observed b
//   state NAME {s}              first state is initial
//   edge FROM COND -> TO        first matching edge wins
//
//   [objectives NAME]           one LTL formula per line, highest first
//   [strategy NAME]             process P [Q ...] / state NAME {outs} / next FROM COND -> TO
//   [assumption NAME]           process P / labels ... / branch B -> I I ... /
//                               input I [pending] COND -> B; COND -> B / annotate I {outs}
//   [order]                     P > Q > R
//
// COND is `*` or a comma-separated list of literals `x` / `!x`.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "domsyn/architecture.hpp"
#include "domsyn/assumption.hpp"
#include "domsyn/dominance.hpp"
#include "domsyn/ltl.hpp"

namespace domsyn {

class SpecFileError : public std::runtime_error {
 public:
  SpecFileError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct NamedStrategy {
  std::vector<std::string> processes;
  Transducer transducer;
};

struct NamedAssumption {
  std::string process;
  AnnotatedGenerator generator;
  bool annotated = false;
};

struct SpecFile {
  Architecture arch;
  std::optional<WorldModel> world;
  std::optional<Transducer> plant;
  std::map<std::string, PrioritizedSpec> objectives;
  std::map<std::string, NamedStrategy> strategies;
  std::map<std::string, NamedAssumption> assumptions;
  std::vector<std::string> order;

  const Universe& universe() const { return *arch.universe; }

  VarSet outputs_of(const std::vector<std::string>& procs) const {
    VarSet s = 0;
    for (const auto& p : procs) s |= arch.process(p).outputs;
    return s;
  }

  VarSet inputs_of(const std::vector<std::string>& procs) const {
    VarSet s = 0;
    for (const auto& p : procs) s |= arch.process(p).inputs;
    return s & ~outputs_of(procs);
  }

  /// Objective k of a group is the conjunction of the members' k-th
  /// objectives; processes without objectives contribute `true`.
  PrioritizedSpec spec_for(const std::vector<std::string>& procs) const {
    std::size_t n = 0;
    for (const auto& p : procs) {
      arch.process(p);
      if (auto it = objectives.find(p); it != objectives.end()) n = std::max(n, it->second.objectives.size());
    }
    PrioritizedSpec out;
    for (std::size_t k = 0; k < n; ++k) {
      FormulaPtr f;
      for (const auto& p : procs) {
        auto it = objectives.find(p);
        if (it == objectives.end() || k >= it->second.objectives.size()) continue;
        f = f ? ltl::conj(f, it->second.objectives[k]) : it->second.objectives[k];
      }
      out.objectives.push_back(f ? f : ltl::tt());
    }
    if (out.objectives.empty()) out.objectives.push_back(ltl::tt());
    return out;
  }

  Arena arena_for(const std::vector<std::string>& procs) const {
    Arena a;
    a.universe = arch.universe;
    a.controlled = outputs_of(procs);
    a.plant = plant;
    a.one_hot = arch.one_hot;
    return a;
  }
};

namespace detail {

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(start, end - start));
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      lines_.push_back(line);
      start = end + 1;
    }
  }

  SpecFile parse() {
    bool any = false;
    for (std::size_t k = 0; k < lines_.size(); ++k) {
      line_ = static_cast<int>(k) + 1;
      auto words = split(lines_[k]);
      if (words.empty()) continue;
      any = true;
      if (words[0].front() == '[') {
        finish_section();
        open_section(lines_[k]);
        continue;
      }
      if (section_.empty()) fail("content before the first section");
      dispatch(words, lines_[k]);
    }
    line_ = static_cast<int>(lines_.size());
    if (!any) throw SpecFileError(1, "empty spec file");
    finish_section();
    if (!arch_done_) fail("missing [architecture] section");
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SpecFileError(line_, what); }

  static std::vector<std::string> split(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
  }

  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  // Text following the first n words of a line.
  static std::string after_words(const std::string& raw, std::size_t n) {
    std::size_t pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
      pos = raw.find_first_not_of(" \t\r", pos);
      if (pos == std::string::npos) return {};
      pos = raw.find_first_of(" \t\r", pos);
      if (pos == std::string::npos) return {};
    }
    return trim(raw.substr(pos));
  }

  const Universe& u() const { return *out_.arch.universe; }

  int var(const std::string& name) const {
    if (!u().contains(name)) fail("undeclared variable '" + name + "'");
    return u().index(name);
  }

  VarSet vars(const std::vector<std::string>& words, std::size_t from, std::size_t to) const {
    VarSet s = 0;
    for (std::size_t k = from; k < to; ++k) s |= bit(var(words[k]));
    return s;
  }

  struct Cond {
    Valuation pos = 0, neg = 0;
    bool matches(Valuation v) const { return (v & pos) == pos && (v & neg) == 0; }
  };

  Cond cond(const std::string& text, VarSet scope) const {
    Cond c;
    std::string t = trim(text);
    if (t == "*") return c;
    std::string item;
    std::istringstream in(t);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      bool negated = !item.empty() && item[0] == '!';
      if (negated) item = trim(item.substr(1));
      if (item.empty()) fail("empty literal in condition '" + t + "'");
      VarSet b = bit(var(item));
      if (!(b & scope)) fail("variable '" + item + "' cannot appear in this condition");
      (negated ? c.neg : c.pos) |= b;
    }
    return c;
  }

  Valuation letter(const std::string& text, VarSet scope) const {
    Valuation v = 0;
    try {
      v = u().parse_letter(trim(text));
    } catch (const VarError& e) {
      fail(e.what());
    }
    if (v & ~scope) fail("letter " + text + " sets variables outside " + u().format(scope));
    if (!out_.arch.one_hot.legal(v, scope)) fail("letter " + text + " violates a one-hot group");
    return v;
  }

  // "A -> B" split on the arrow.
  std::pair<std::string, std::string> arrow(const std::string& text) const {
    auto p = text.find("->");
    if (p == std::string::npos) fail("expected '->'");
    return {trim(text.substr(0, p)), trim(text.substr(p + 2))};
  }

  std::vector<std::string> process_list(const std::vector<std::string>& words) const {
    std::vector<std::string> ps(words.begin() + 1, words.end());
    if (ps.empty()) fail("'process' needs a name");
    for (const auto& p : ps) {
      if (!out_.arch.processes.count(p)) fail("unknown process '" + p + "'");
    }
    return ps;
  }

  void open_section(const std::string& raw) {
    std::string t = trim(raw);
    if (t.back() != ']') fail("malformed section header");
    auto words = split(t.substr(1, t.size() - 2));
    if (words.empty()) fail("empty section header");
    section_ = words[0];
    name_ = words.size() > 1 ? words[1] : "";
    header_line_ = line_;
    if (words.size() > 2) fail("too many words in section header");
    bool named = section_ == "objectives" || section_ == "strategy" || section_ == "assumption";
    if (named && name_.empty()) fail("[" + section_ + "] needs a name");
    if (!named && !name_.empty()) fail("[" + section_ + "] takes no name");
    if (section_ == "architecture") {
      if (arch_done_ || arch_started_) fail("duplicate [architecture] section");
      arch_started_ = true;
      out_.arch.universe = universe_;
      return;
    }
    if (section_ != "world" && section_ != "objectives" && section_ != "strategy" && section_ != "assumption" &&
        section_ != "order") {
      fail("unknown section [" + section_ + "]");
    }
    if (!arch_done_) fail("[" + section_ + "] before [architecture]");
    if (section_ == "world") {
      if (out_.world) fail("duplicate [world] section");
      out_.world.emplace();
    } else if (section_ == "objectives") {
      if (!out_.arch.processes.count(name_)) fail("objectives for unknown process '" + name_ + "'");
      if (out_.objectives.count(name_)) fail("duplicate objectives for '" + name_ + "'");
      out_.objectives[name_];
    } else if (section_ == "strategy") {
      if (out_.strategies.count(name_)) fail("duplicate strategy '" + name_ + "'");
      strat_ = {};
    } else if (section_ == "assumption") {
      if (out_.assumptions.count(name_)) fail("duplicate assumption '" + name_ + "'");
      assume_ = {};
    } else if (section_ == "order" && !out_.order.empty()) {
      fail("duplicate [order] section");
    }
  }

  void dispatch(const std::vector<std::string>& words, const std::string& raw) {
    if (section_ == "architecture") return architecture_line(words);
    if (section_ == "world") return world_line(words, raw);
    if (section_ == "objectives") return objective_line(raw);
    if (section_ == "strategy") return strategy_line(words, raw);
    if (section_ == "assumption") return assumption_line(words, raw);
    if (section_ == "order") return order_line(raw);
  }

  void architecture_line(const std::vector<std::string>& w) {
    if (w[0] == "vars") {
      for (std::size_t k = 1; k < w.size(); ++k) {
        if (universe_->contains(w[k])) fail("variable '" + w[k] + "' declared twice");
        try {
          universe_->add(w[k]);
        } catch (const VarError& e) {
          fail(e.what());
        }
      }
    } else if (w[0] == "process") {
      if (w.size() < 2) fail("'process' needs a name");
      if (out_.arch.processes.count(w[1])) fail("process '" + w[1] + "' declared twice");
      ProcessInterface p;
      std::size_t k = 2;
      VarSet* target = nullptr;
      for (; k < w.size(); ++k) {
        if (w[k] == "inputs") {
          target = &p.inputs;
        } else if (w[k] == "outputs") {
          target = &p.outputs;
        } else {
          if (!target) fail("expected 'inputs' or 'outputs' after the process name");
          *target |= bit(var(w[k]));
        }
      }
      out_.arch.processes.emplace(w[1], p);
    } else if (w[0] == "onehot") {
      if (w.size() < 3) fail("a one-hot group needs at least two variables");
      out_.arch.one_hot.groups.push_back(vars(w, 1, w.size()));
    } else if (w[0] == "plant") {
      out_.arch.plant |= vars(w, 1, w.size());
    } else {
      fail("unknown architecture statement '" + w[0] + "'");
    }
  }

  void world_line(const std::vector<std::string>& w, const std::string& raw) {
    auto& wm = *out_.world;
    if (w[0] == "own" || w[0] == "observed") {
      (w[0] == "own" ? wm.own : wm.observed) |= vars(w, 1, w.size());
    } else if (w[0] == "state") {
      if (w.size() < 2) fail("'state' needs a name");
      for (const auto& s : wm.states) {
        if (s == w[1]) fail("world state '" + w[1] + "' declared twice");
      }
      std::string rest = after_words(raw, 2);
      wm.states.push_back(w[1]);
      wm.predicates.push_back(rest.empty() ? 0 : letter(rest, out_.arch.plant));
    } else if (w[0] == "edge") {
      auto [lhs, dst] = arrow(after_words(raw, 1));
      auto sp = lhs.find_first_of(" \t");
      if (sp == std::string::npos) fail("edge needs a source state and a condition");
      world_edges_.push_back({line_, lhs.substr(0, sp), cond(lhs.substr(sp), wm.own | wm.observed), dst});
    } else {
      fail("unknown world statement '" + w[0] + "'");
    }
  }

  void objective_line(const std::string& raw) {
    try {
      out_.objectives[name_].objectives.push_back(parse_ltl(raw, u()));
    } catch (const UnknownAtomError& e) {
      fail("objective uses undeclared atom '" + e.name() + "'");
    } catch (const LtlSyntaxError& e) {
      fail(std::string("objective: ") + e.what());
    }
  }

  struct PendingEdge {
    int line;
    std::string src;
    Cond cond;
    std::string dst;
  };

  struct StrategyDraft {
    std::vector<std::string> processes;
    std::vector<std::string> states;
    std::vector<Valuation> outputs;
    std::vector<PendingEdge> edges;
  };

  void strategy_line(const std::vector<std::string>& w, const std::string& raw) {
    if (w[0] == "process") {
      if (!strat_.processes.empty()) fail("duplicate 'process' line");
      strat_.processes = process_list(w);
      return;
    }
    if (strat_.processes.empty()) fail("strategy must start with 'process'");
    const VarSet outs = out_.outputs_of(strat_.processes), ins = out_.inputs_of(strat_.processes);
    if (w[0] == "state") {
      if (w.size() < 2) fail("'state' needs a name");
      for (const auto& s : strat_.states) {
        if (s == w[1]) fail("state '" + w[1] + "' declared twice");
      }
      strat_.states.push_back(w[1]);
      strat_.outputs.push_back(letter(after_words(raw, 2), outs));
    } else if (w[0] == "next") {
      auto [lhs, dst] = arrow(after_words(raw, 1));
      auto sp = lhs.find_first_of(" \t");
      if (sp == std::string::npos) fail("'next' needs a source state and a condition");
      strat_.edges.push_back({line_, lhs.substr(0, sp), cond(lhs.substr(sp), ins), dst});
    } else {
      fail("unknown strategy statement '" + w[0] + "'");
    }
  }

  struct AssumptionDraft {
    std::string process;
    VarSet labels = 0;
    bool labels_set = false;
    std::vector<std::string> branches, inputs;
    std::vector<std::pair<int, std::vector<std::string>>> promises;  // line, input names per branch
    struct Move {
      int line;
      Cond cond;
      std::string dst;
    };
    std::vector<std::vector<Move>> moves;
    std::vector<bool> pending;
    std::map<std::string, Valuation> annotation;
  };

  void assumption_line(const std::vector<std::string>& w, const std::string& raw) {
    auto& a = assume_;
    if (w[0] == "process") {
      if (!a.process.empty()) fail("duplicate 'process' line");
      if (w.size() != 2) fail("an assumption belongs to exactly one process");
      a.process = process_list(w).front();
      return;
    }
    if (a.process.empty()) fail("assumption must start with 'process'");
    const VarSet outs = out_.arch.process(a.process).outputs;
    if (w[0] == "labels") {
      a.labels = vars(w, 1, w.size());
      a.labels_set = true;
      if (a.labels & outs) fail("labels include the process's own outputs");
    } else if (w[0] == "branch") {
      auto [lhs, rhs] = arrow(after_words(raw, 1));
      if (lhs.empty() || split(lhs).size() != 1) fail("'branch' needs one name");
      for (const auto& b : a.branches) {
        if (b == lhs) fail("branch node '" + lhs + "' declared twice");
      }
      a.branches.push_back(lhs);
      a.promises.push_back({line_, split(rhs)});
      if (a.promises.back().second.empty()) fail("branch node '" + lhs + "' has no promise");
    } else if (w[0] == "input") {
      if (!a.labels_set) fail("'labels' must precede input nodes");
      if (w.size() < 3) fail("'input' needs a name and moves");
      for (const auto& i : a.inputs) {
        if (i == w[1]) fail("input node '" + w[1] + "' declared twice");
      }
      a.inputs.push_back(w[1]);
      bool pending = w[2] == "pending";
      a.pending.push_back(pending);
      std::string rest = after_words(raw, pending ? 3 : 2);
      a.moves.emplace_back();
      std::istringstream in(rest);
      std::string part;
      while (std::getline(in, part, ';')) {
        if (trim(part).empty()) continue;
        auto [c, dst] = arrow(part);
        a.moves.back().push_back({line_, cond(c, a.labels), dst});
      }
      if (a.moves.back().empty()) fail("input node '" + w[1] + "' allows no letter");
    } else if (w[0] == "annotate") {
      if (w.size() < 3) fail("'annotate' needs an input node and a letter");
      if (a.annotation.count(w[1])) fail("input node '" + w[1] + "' annotated twice");
      a.annotation[w[1]] = letter(after_words(raw, 2), outs);
    } else {
      fail("unknown assumption statement '" + w[0] + "'");
    }
  }

  void order_line(const std::string& raw) {
    std::string item;
    std::istringstream in(raw);
    while (std::getline(in, item, '>')) {
      item = trim(item);
      if (item.empty()) fail("empty entry in priority order");
      if (!out_.arch.processes.count(item)) fail("unknown process '" + item + "' in priority order");
      for (const auto& p : out_.order) {
        if (p == item) fail("process '" + item + "' appears twice in priority order");
      }
      out_.order.push_back(item);
    }
  }

  void finish_section() {
    const int saved = line_;
    line_ = header_line_;
    if (section_ == "architecture") finish_architecture();
    if (section_ == "world") finish_world();
    if (section_ == "objectives" && out_.objectives[name_].objectives.empty()) {
      fail("objectives for '" + name_ + "' are empty");
    }
    if (section_ == "strategy") finish_strategy();
    if (section_ == "assumption") finish_assumption();
    section_.clear();
    line_ = saved;
  }

  void finish_architecture() {
    if (universe_->size() == 0) fail("no variables declared");
    if (out_.arch.processes.empty()) fail("no processes declared");
    try {
      out_.arch.validate();
    } catch (const ArchitectureError& e) {
      fail(e.what());
    }
    arch_done_ = true;
  }

  void finish_world() {
    auto& wm = *out_.world;
    if (wm.states.empty()) fail("world model has no states");
    const VarSet actions = wm.own | wm.observed;
    auto state = [&](const std::string& n, int line) {
      for (std::size_t i = 0; i < wm.states.size(); ++i) {
        if (wm.states[i] == n) return static_cast<int>(i);
      }
      throw SpecFileError(line, "unknown world state '" + n + "'");
    };
    for (std::size_t q = 0; q < wm.states.size(); ++q) {
      for (Valuation v : out_.arch.one_hot.letters(actions)) {
        for (const auto& e : world_edges_) {
          if (state(e.src, e.line) != static_cast<int>(q) || !e.cond.matches(v)) continue;
          wm.add_edge(static_cast<int>(q), v & wm.own, v & wm.observed, state(e.dst, e.line));
          break;
        }
      }
    }
    try {
      out_.plant = world_model_to_transducer(wm, out_.arch.plant, out_.arch.one_hot, u());
    } catch (const ArchitectureError& e) {
      fail(e.what());
    }
  }

  void finish_strategy() {
    auto& s = strat_;
    if (s.processes.empty()) fail("strategy '" + name_ + "' names no process");
    if (s.states.empty()) fail("strategy '" + name_ + "' has no states");
    const VarSet ins = out_.inputs_of(s.processes), outs = out_.outputs_of(s.processes);
    Transducer t = Transducer::with_states(ins, outs, static_cast<int>(s.states.size()));
    t.output = s.outputs;
    t.state_names = s.states;
    auto index = [&](const std::string& n, int line) {
      for (std::size_t i = 0; i < s.states.size(); ++i) {
        if (s.states[i] == n) return static_cast<int>(i);
      }
      throw SpecFileError(line, "unknown state '" + n + "'");
    };
    for (const auto& e : s.edges) {
      index(e.src, e.line);
      index(e.dst, e.line);
    }
    for (std::size_t q = 0; q < s.states.size(); ++q) {
      for (Valuation v : out_.arch.one_hot.letters(ins)) {
        bool done = false;
        for (const auto& e : s.edges) {
          if (index(e.src, e.line) != static_cast<int>(q) || !e.cond.matches(v)) continue;
          t.next[q][static_cast<std::size_t>(compress(v, ins))] = index(e.dst, e.line);
          done = true;
          break;
        }
        if (!done) {
          fail("strategy '" + name_ + "' has no transition from '" + s.states[q] + "' on " + u().format(v));
        }
      }
    }
    out_.strategies[name_] = {s.processes, std::move(t)};
  }

  void finish_assumption() {
    auto& a = assume_;
    if (a.process.empty()) fail("assumption '" + name_ + "' names no process");
    if (a.branches.empty()) fail("assumption '" + name_ + "' has no branch nodes");
    AnnotatedGenerator ag;
    auto& g = ag.generator;
    g.labels = a.labels;
    g.name = name_;
    ag.outputs = out_.arch.process(a.process).outputs;
    for (std::size_t b = 0; b < a.branches.size(); ++b) g.add_branch();
    for (std::size_t i = 0; i < a.inputs.size(); ++i) g.add_input(a.pending[i]);
    auto find = [](const std::vector<std::string>& names, const std::string& n) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == n) return static_cast<int>(i);
      }
      return -1;
    };
    for (std::size_t b = 0; b < a.branches.size(); ++b) {
      for (const auto& n : a.promises[b].second) {
        int i = find(a.inputs, n);
        if (i < 0) throw SpecFileError(a.promises[b].first, "unknown input node '" + n + "'");
        g.promise(static_cast<int>(b), i);
      }
    }
    const auto legal = out_.arch.one_hot.letters(a.labels);
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
      for (const auto& m : a.moves[i]) {
        if (find(a.branches, m.dst) < 0) throw SpecFileError(m.line, "unknown branch node '" + m.dst + "'");
      }
      for (Valuation v : legal) {
        for (const auto& m : a.moves[i]) {
          if (!m.cond.matches(v)) continue;
          g.move(static_cast<int>(i), v, find(a.branches, m.dst));
          break;
        }
      }
    }
    for (const auto& [n, _] : a.annotation) {
      if (find(a.inputs, n) < 0) fail("annotation of unknown input node '" + n + "'");
    }
    if (!a.annotation.empty()) {
      for (const auto& n : a.inputs) {
        auto it = a.annotation.find(n);
        if (it == a.annotation.end()) fail("input node '" + n + "' of '" + name_ + "' is not annotated");
        ag.annotation.push_back(it->second);
      }
    }
    try {
      g.validate();
    } catch (const GeneratorError& e) {
      fail(e.what());
    }
    out_.assumptions[name_] = {a.process, std::move(ag), !a.annotation.empty()};
  }

  std::vector<std::string> lines_;
  int line_ = 0, header_line_ = 0;
  std::string section_, name_;
  bool arch_started_ = false, arch_done_ = false;
  std::shared_ptr<Universe> universe_ = std::make_shared<Universe>();
  std::vector<PendingEdge> world_edges_;
  StrategyDraft strat_;
  AssumptionDraft assume_;
  SpecFile out_;
};

}  // namespace detail

inline SpecFile parse_spec(std::string_view text) { return detail::SpecParser(text).parse(); }

inline SpecFile load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecFileError(0, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

}  // namespace domsyn
