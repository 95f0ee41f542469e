#pragma once

// JSON export and import (schema version 1). Letters are sorted lists of
// the names of true variables.

#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "domsyn/assumption.hpp"
#include "domsyn/dominance.hpp"
#include "domsyn/search.hpp"

namespace domsyn::io {

using json = nlohmann::ordered_json;

inline constexpr int kFormat = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json letter(const Universe& u, Valuation v) {
  auto names = u.names_in(v);
  std::sort(names.begin(), names.end());
  return names;
}

inline Valuation letter_from(const Universe& u, const json& j) {
  if (!j.is_array()) throw FormatError("letter must be an array of variable names");
  Valuation v = 0;
  for (const auto& n : j) {
    if (!n.is_string() || !u.contains(n.get<std::string>())) throw FormatError("unknown variable in letter");
    v |= bit(u.index(n.get<std::string>()));
  }
  return v;
}

inline json vars(const Universe& u, VarSet s) { return letter(u, s); }

inline json lasso(const Universe& u, const Lasso& w) {
  json stem = json::array(), loop = json::array();
  for (Valuation v : w.stem) stem.push_back(letter(u, v));
  for (Valuation v : w.loop) loop.push_back(letter(u, v));
  return {{"stem", stem}, {"loop", loop}};
}

inline Lasso lasso_from(const Universe& u, const json& j) {
  Lasso w;
  for (const auto& l : j.at("stem")) w.stem.push_back(letter_from(u, l));
  for (const auto& l : j.at("loop")) w.loop.push_back(letter_from(u, l));
  if (w.loop.empty()) throw FormatError("lasso loop must be nonempty");
  return w;
}

inline json counterexample(const Universe& u, const Counterexample& c) {
  return {{"gamma", lasso(u, c.gamma)},
          {"outputs", lasso(u, c.outputs)},
          {"better", lasso(u, c.better)},
          {"achieved", c.k},
          {"achievable", c.m}};
}

inline json dominance(const Universe& u, const DominanceVerdict& v) {
  json j = {{"format", kFormat}, {"dominant", v.dominant}};
  if (v.counterexample) j["counterexample"] = counterexample(u, *v.counterexample);
  return j;
}

inline json winning(const Universe& u, const WinningVerdict& v) {
  json j = {{"format", kFormat}, {"winning", v.winning}};
  if (v.gamma) j["gamma"] = lasso(u, *v.gamma);
  return j;
}

/// Transitions are listed for every legal input letter.
inline json transducer(const Universe& u, const Transducer& t, const OneHot& one_hot) {
  json states = json::array();
  for (int q = 0; q < t.size(); ++q) {
    json next = json::array();
    for (Valuation x : one_hot.letters(t.inputs)) {
      next.push_back({{"input", letter(u, x)}, {"to", t.state_name(t.step(q, x))}});
    }
    states.push_back({{"name", t.state_name(q)}, {"output", letter(u, t.output[q])}, {"next", next}});
  }
  return {{"format", kFormat},
          {"inputs", vars(u, t.inputs)},
          {"outputs", vars(u, t.outputs)},
          {"initial", t.state_name(t.initial)},
          {"states", states}};
}

inline Transducer transducer_from(const Universe& u, const json& j) {
  if (j.value("format", 0) != kFormat) throw FormatError("unsupported transducer format");
  const VarSet ins = letter_from(u, j.at("inputs")), outs = letter_from(u, j.at("outputs"));
  const auto& states = j.at("states");
  Transducer t = Transducer::with_states(ins, outs, static_cast<int>(states.size()));
  std::map<std::string, int> ids;
  for (std::size_t q = 0; q < states.size(); ++q) {
    std::string name = states[q].at("name").get<std::string>();
    if (!ids.emplace(name, static_cast<int>(q)).second) throw FormatError("duplicate state '" + name + "'");
    t.state_names.push_back(name);
  }
  auto id = [&](const json& n) {
    auto it = ids.find(n.get<std::string>());
    if (it == ids.end()) throw FormatError("unknown state '" + n.get<std::string>() + "'");
    return it->second;
  };
  t.initial = id(j.at("initial"));
  for (std::size_t q = 0; q < states.size(); ++q) {
    t.output[q] = letter_from(u, states[q].at("output"));
    if (t.output[q] & ~outs) throw FormatError("state output outside the declared outputs");
    for (const auto& e : states[q].at("next")) {
      Valuation x = letter_from(u, e.at("input"));
      if (x & ~ins) throw FormatError("transition input outside the declared inputs");
      t.next[q][static_cast<std::size_t>(compress(x, ins))] = id(e.at("to"));
    }
  }
  return t;
}

/// Shortest tree address of every input node: the promise numbers in unary
/// code and the letters in between.
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<Valuation>>> addresses(
    const AssumptionGenerator& g) {
  std::vector<std::pair<std::vector<std::size_t>, std::vector<Valuation>>> out(g.inputs.size());
  std::vector<char> seen(g.inputs.size(), 0);
  std::deque<int> queue;
  auto reach = [&](int b, const std::vector<std::size_t>& ps, const std::vector<Valuation>& ls) {
    const auto& promises = g.branches[b].promises;
    for (std::size_t k = 0; k < promises.size(); ++k) {
      int i = promises[k];
      if (seen[i]) continue;
      seen[i] = 1;
      out[i] = {ps, ls};
      out[i].first.push_back(k + 1);
      queue.push_back(i);
    }
  };
  reach(g.root, {}, {});
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    for (const auto& [x, b] : g.inputs[i].moves) {
      auto ls = out[i].second;
      ls.push_back(x);
      reach(b, out[i].first, ls);
    }
  }
  return out;
}

inline json generator(const Universe& u, const AssumptionGenerator& g, const std::vector<Valuation>* annotation = nullptr,
                      VarSet outputs = 0) {
  json branches = json::array(), inputs = json::array();
  for (const auto& b : g.branches) branches.push_back({{"promises", b.promises}});
  const auto addr = addresses(g);
  for (std::size_t i = 0; i < g.inputs.size(); ++i) {
    json moves = json::array();
    for (const auto& [x, b] : g.inputs[i].moves) moves.push_back({{"letter", letter(u, x)}, {"to", b}});
    json node = {{"pending", g.inputs[i].pending}, {"moves", moves}};
    json letters = json::array();
    for (Valuation x : addr[i].second) letters.push_back(letter(u, x));
    node["address"] = {{"promises", encode_unary(addr[i].first)}, {"letters", letters}};
    if (annotation) node["annotation"] = letter(u, (*annotation)[i]);
    inputs.push_back(node);
  }
  json j = {{"format", kFormat}, {"name", g.name}, {"labels", vars(u, g.labels)}};
  if (annotation) j["outputs"] = vars(u, outputs);
  j["root"] = g.root;
  j["branches"] = branches;
  j["inputs"] = inputs;
  return j;
}

inline json generator(const Universe& u, const AnnotatedGenerator& ag) {
  return generator(u, ag.generator, &ag.annotation, ag.outputs);
}

inline AnnotatedGenerator generator_from(const Universe& u, const json& j) {
  if (j.value("format", 0) != kFormat) throw FormatError("unsupported generator format");
  AnnotatedGenerator ag;
  auto& g = ag.generator;
  g.name = j.value("name", "");
  g.labels = letter_from(u, j.at("labels"));
  if (j.contains("outputs")) ag.outputs = letter_from(u, j.at("outputs"));
  for (const auto& b : j.at("branches")) {
    int id = g.add_branch();
    for (const auto& i : b.at("promises")) g.promise(id, i.get<int>());
  }
  for (const auto& in : j.at("inputs")) {
    int id = g.add_input(in.value("pending", false));
    for (const auto& m : in.at("moves")) g.move(id, letter_from(u, m.at("letter")), m.at("to").get<int>());
    if (in.contains("annotation")) ag.annotation.push_back(letter_from(u, in.at("annotation")));
  }
  g.root = j.at("root").get<int>();
  if (!ag.annotation.empty() && ag.annotation.size() != g.inputs.size()) {
    throw FormatError("annotation must cover every input node");
  }
  try {
    g.validate();
  } catch (const GeneratorError& e) {
    throw FormatError(e.what());
  }
  return ag;
}

}  // namespace domsyn::io
