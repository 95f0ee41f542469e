#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "domsyn/transducer.hpp"

namespace domsyn {

class ArchitectureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessInterface {
  VarSet inputs = 0;
  VarSet outputs = 0;
};

/// Processes with input/output maps over a shared variable universe.
/// `plant` holds state-predicate variables driven by the world model; they
/// are neither process outputs nor external inputs.
struct Architecture {
  UniversePtr universe;
  std::map<std::string, ProcessInterface> processes;
  OneHot one_hot;
  VarSet plant = 0;

  VarSet variables() const { return universe->all(); }

  VarSet all_outputs() const {
    VarSet s = 0;
    for (const auto& [_, p] : processes) s |= p.outputs;
    return s;
  }

  VarSet external_inputs() const { return variables() & ~all_outputs() & ~plant; }

  const ProcessInterface& process(const std::string& name) const {
    auto it = processes.find(name);
    if (it == processes.end()) throw ArchitectureError("unknown process '" + name + "'");
    return it->second;
  }

  /// Throws on overlapping inputs/outputs, shared outputs, or external
  /// inputs hidden from some process.
  void validate() const {
    VarSet seen = 0;
    for (const auto& [name, p] : processes) {
      if (p.inputs & p.outputs) throw ArchitectureError("process '" + name + "' reads its own outputs");
      if (seen & p.outputs) throw ArchitectureError("process '" + name + "' shares output variables");
      if (p.outputs & plant) throw ArchitectureError("process '" + name + "' outputs a plant variable");
      seen |= p.outputs;
    }
    for (const auto& [name, p] : processes) {
      if (!subset_of(external_inputs(), p.inputs)) {
        throw ArchitectureError("external inputs are not visible to process '" + name + "'");
      }
    }
  }
};

/// Union of two architectures over the same variables with disjoint process
/// sets.
inline Architecture compose_architectures(const Architecture& a, const Architecture& b) {
  if (a.universe->size() != b.universe->size()) {
    throw ArchitectureError("architectures declare different variables");
  }
  for (int i = 0; i < a.universe->size(); ++i) {
    if (a.universe->name(i) != b.universe->name(i)) {
      throw ArchitectureError("architectures declare different variables");
    }
  }
  Architecture out = a;
  for (const auto& [name, p] : b.processes) {
    if (out.processes.count(name)) throw ArchitectureError("process '" + name + "' appears in both");
    out.processes.emplace(name, p);
  }
  out.one_hot.groups.insert(out.one_hot.groups.end(), b.one_hot.groups.begin(),
                            b.one_hot.groups.end());
  out.plant |= b.plant;
  out.validate();
  return out;
}

/// Input-deterministic transition system over system states. Edges carry a
/// pair (letter of `own` actions, letter of `observed` actions); each state
/// carries the plant predicates that hold in it.
struct WorldModel {
  VarSet own = 0;
  VarSet observed = 0;
  std::vector<std::string> states;
  std::vector<Valuation> predicates;  // per state
  int initial = 0;
  struct Edge {
    int src;
    Valuation own;
    Valuation observed;
    int dst;
  };
  std::vector<Edge> edges;

  int state(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == name) return static_cast<int>(i);
    }
    throw ArchitectureError("unknown world state '" + name + "'");
  }

  /// Adds an edge; rejects a second edge with the same source and label but a
  /// different target.
  void add_edge(int src, Valuation own_letter, Valuation observed_letter, int dst) {
    for (const auto& e : edges) {
      if (e.src == src && e.own == own_letter && e.observed == observed_letter) {
        if (e.dst != dst) {
          throw ArchitectureError("world model is not input-deterministic in state '" +
                                  states[src] + "'");
        }
        return;
      }
    }
    edges.push_back({src, own_letter & own, observed_letter & observed, dst});
  }
};

/// Plant transducer: inputs are the world model's action variables, outputs
/// the predicate variables. It emits the predicates of the current system
/// state and then moves on the joint action letter. Letters violating the
/// one-hot constraints leave the state unchanged; every legal letter must
/// have a transition.
inline Transducer world_model_to_transducer(const WorldModel& w, VarSet predicates,
                                            const OneHot& one_hot, const Universe& u) {
  const VarSet actions = w.own | w.observed;
  if (actions & predicates) throw ArchitectureError("plant predicates overlap action variables");
  Transducer t = Transducer::with_states(actions, predicates, static_cast<int>(w.states.size()));
  t.initial = w.initial;
  t.state_names = w.states;
  for (std::size_t q = 0; q < w.states.size(); ++q) t.output[q] = w.predicates[q] & predicates;
  std::vector<std::vector<char>> defined(w.states.size(), std::vector<char>(t.letter_count(), 0));
  for (const auto& e : w.edges) {
    auto l = static_cast<std::size_t>(compress(e.own | e.observed, actions));
    t.next[e.src][l] = e.dst;
    defined[e.src][l] = 1;
  }
  for (std::size_t q = 0; q < w.states.size(); ++q) {
    for (Valuation v : one_hot.letters(actions)) {
      auto l = static_cast<std::size_t>(compress(v, actions));
      if (!defined[q][l]) {
        throw ArchitectureError("world model has no transition from '" + w.states[q] + "' on " +
                                u.format(v & w.own) + "," + u.format(v & w.observed));
      }
    }
  }
  return t;
}

}  // namespace domsyn
