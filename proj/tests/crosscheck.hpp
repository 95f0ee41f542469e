#pragma once

// Random cross-validation of check_dominant against brute-force enumeration
// on V = {a, b}, with the process controlling b.

#include <random>
#include <string>

#include "domsyn/dominance.hpp"
#include "oracles.hpp"

namespace crosscheck {

using namespace domsyn;

struct Outcome {
  bool agree = true;
  std::string detail;
};

inline Transducer random_transducer(std::mt19937& rng, VarSet inputs, VarSet outputs) {
  int n = std::uniform_int_distribution<int>(1, 2)(rng);
  Transducer t = Transducer::with_states(inputs, outputs, n);
  std::uniform_int_distribution<int> coin(0, 1), state(0, n - 1);
  for (int q = 0; q < n; ++q) {
    t.output[q] = coin(rng) ? outputs : 0;
    for (auto& d : t.next[q]) d = state(rng);
  }
  return t;
}

/// One random instance: 1-3 objectives of depth <= 3, a transducer with at
/// most 2 states, brute force over stem <= 4 and loop <= 3.
inline Outcome run_one(std::mt19937& rng) {
  auto u = std::make_shared<Universe>(std::vector<std::string>{"a", "b"});
  Arena arena;
  arena.universe = u;
  arena.controlled = bit(1);
  PrioritizedSpec spec;
  int n = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int i = 0; i < n; ++i) spec.objectives.push_back(oracle::random_formula(rng, 2, 3));
  Transducer s = random_transducer(rng, bit(0), bit(1));
  auto fast = check_dominant(spec, s, arena);
  auto slow = brute_force_dominance(spec, s, arena, 4, 3);
  std::string text;
  for (const auto& f : spec.objectives) text += to_string(*u, f) + " ; ";
  if (fast.counterexample && !validate(spec, arena, *fast.counterexample)) {
    return {false, "invalid counterexample for " + text};
  }
  if (slow.counterexample && !validate(spec, arena, *slow.counterexample)) {
    return {false, "invalid brute-force counterexample for " + text};
  }
  if (!slow.dominant && fast.dominant) return {false, "missed counterexample for " + text};
  if (!fast.dominant) {
    const auto& c = *fast.counterexample;
    Lasso joint = merge(c.gamma, c.better).canonical();
    if (joint.stem.size() <= 4 && joint.loop.size() <= 3 && slow.dominant) {
      return {false, "brute force missed " + format_lasso(*u, joint) + " for " + text};
    }
  }
  return {};
}

}  // namespace crosscheck
