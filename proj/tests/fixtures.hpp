#pragma once

// Hand-built arenas for the side-by-side driving example and the
// (X a) <-> b example.

#include <memory>

#include "domsyn/architecture.hpp"
#include "domsyn/dominance.hpp"

namespace fixture {

using namespace domsyn;

struct SideBySide {
  UniversePtr u;
  VarSet ego = 0, other = 0, sbs = 0;
  Valuation accel_e = 0, keep_e = 0, decel_e = 0, accel_o = 0, keep_o = 0, decel_o = 0;
  OneHot one_hot;
  Transducer plant;

  SideBySide() {
    auto uni = std::make_shared<Universe>(
        std::vector<std::string>{"accel_e", "keep_e", "decel_e", "accel_o", "keep_o", "decel_o", "sbs"});
    u = uni;
    accel_e = bit(0), keep_e = bit(1), decel_e = bit(2);
    accel_o = bit(3), keep_o = bit(4), decel_o = bit(5);
    ego = accel_e | keep_e | decel_e;
    other = accel_o | keep_o | decel_o;
    sbs = bit(6);
    one_hot.groups = {ego, other};
    // Equal actions keep the cars side by side; any difference separates
    // them for good.
    WorldModel w;
    w.own = ego;
    w.observed = other;
    w.states = {"sbs", "nsbs"};
    w.predicates = {sbs, 0};
    const Valuation e[] = {accel_e, keep_e, decel_e}, o[] = {accel_o, keep_o, decel_o};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        w.add_edge(0, e[i], o[j], i == j ? 0 : 1);
        w.add_edge(1, e[i], o[j], 1);
      }
    }
    plant = world_model_to_transducer(w, sbs, one_hot, *u);
  }

  Arena ego_arena() const {
    Arena a;
    a.universe = u;
    a.controlled = ego;
    a.plant = plant;
    a.one_hot = one_hot;
    return a;
  }

  /// Ego reads the other car's actions and the sbs predicate.
  VarSet ego_inputs() const { return other | sbs; }

  PrioritizedSpec spec() const {
    return {{parse_ltl("F !sbs", *u), parse_ltl("G keep_e", *u)}};
  }

  Transducer keep() const { return Transducer::constant(ego_inputs(), ego, keep_e); }

  /// Accelerates in the first step, keeps afterwards.
  Transducer acc() const {
    Transducer t = Transducer::with_states(ego_inputs(), ego, 2);
    t.output = {accel_e, keep_e};
    for (auto& d : t.next[0]) d = 1;
    return t;
  }
};

struct NextAB {
  UniversePtr u = std::make_shared<Universe>(std::vector<std::string>{"a", "b"});
  Valuation a = bit(0), b = bit(1);

  PrioritizedSpec spec() const { return {{parse_ltl("(X a) <-> b", *u)}}; }

  Arena arena(VarSet controlled) const {
    Arena ar;
    ar.universe = u;
    ar.controlled = controlled;
    return ar;
  }
};

}  // namespace fixture
