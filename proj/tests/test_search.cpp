#include <catch2/catch_amalgamated.hpp>

#include "domsyn/search.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace domsyn;

namespace {

bool same_language(const AssumptionGenerator& a, const AssumptionGenerator& b, const LetterSet& letters) {
  bool same = true;
  for_each_lasso(letters, 3, 2, [&](const Lasso& w) {
    same = same && accepts(generator_automaton(a), w) == accepts(generator_automaton(b), w);
  });
  return same;
}

PathStep promise(std::size_t k) { return {true, k, 0}; }
PathStep letter(Valuation v) { return {false, 0, v}; }

}  // namespace

TEST_CASE("label variables") {
  fixture::SideBySide f;
  CHECK(label_vars(f.spec(), f.ego_arena()) == f.other);
  fixture::NextAB x;
  CHECK(label_vars(x.spec(), x.arena(x.b)) == x.a);
  CHECK(label_vars(PrioritizedSpec{{ltl::tt()}}, x.arena(x.b)) == 0);
}

TEST_CASE("history shape") {
  fixture::NextAB x;
  auto g = shapes::history(x.a, {0, x.a}, 2);
  CHECK(g.size() == 7);
  CHECK_NOTHROW(g.validate());
  CHECK(is_universal(g, OneHot{}));
}

TEST_CASE("trivial spec yields the universal generator first") {
  fixture::NextAB x;
  auto found = search_assumption_bounded(PrioritizedSpec{{ltl::tt()}}, x.arena(x.b), 3);
  REQUIRE_FALSE(found.empty());
  CHECK(found.front().generator.size() == 1);
  CHECK(is_universal(found.front().generator, OneHot{}));
}

TEST_CASE("(X a) <-> b: the weakest assumptions fix a's next value") {
  fixture::NextAB x;
  auto arena = x.arena(x.b);
  auto found = search_assumption_bounded(x.spec(), arena, 4);
  REQUIRE_FALSE(found.empty());
  for (const auto& ag : found) REQUIRE(check_annotation_dominant(x.spec(), ag, arena).dominant);
  const auto& best = found.front();
  const auto& g = best.generator;
  REQUIRE(g.branches[g.root].promises.size() == 2);
  for (std::size_t p = 1; p <= 2; ++p) {
    // Exactly one value of a is allowed at the second step.
    int allowed = 0;
    Valuation which = 0;
    for (Valuation first : {Valuation{0}, x.a}) {
      for (Valuation second : {Valuation{0}, x.a}) {
        if (contains_path(g, {promise(p), letter(first), promise(1), letter(second)})) {
          ++allowed;
          which = second;
        }
      }
    }
    CHECK(allowed == 2);
    int in = g.branches[g.root].promises[p - 1];
    CHECK(best.annotation[in] == (which ? x.b : 0));
  }
  CHECK_FALSE(is_universal(g, OneHot{}));
}

TEST_CASE("side-by-side search includes the combined assumption") {
  fixture::SideBySide f;
  auto arena = f.ego_arena();
  auto spec = f.spec();
  const LetterSet all = {f.accel_o, f.keep_o, f.decel_o};
  auto found = search_assumption_bounded(spec, arena, 6);
  REQUIRE_FALSE(found.empty());
  auto combined = shapes::combine(shapes::invariant(f.other, {f.keep_o}),
                              shapes::within(f.other, all, {f.accel_o, f.decel_o}, 3));
  CHECK(combined.size() == 6);
  bool present = false;
  for (const auto& ag : found) {
    REQUIRE(check_annotation_dominant(spec, ag, arena).dominant);
    present = present || same_language(ag.generator, combined, all);
  }
  CHECK(present);
  // Nothing later in the list is strictly more permissive than the front.
  for (const auto& ag : found) {
    if (simulated_by(found.front().generator, ag.generator)) {
      CHECK(simulated_by(ag.generator, found.front().generator));
    }
  }
}

TEST_CASE("search returns generators in permissiveness order") {
  fixture::SideBySide f;
  auto found = search_assumption_bounded(f.spec(), f.ego_arena(), 4);
  for (std::size_t i = 0; i < found.size(); ++i) {
    for (std::size_t j = i + 1; j < found.size(); ++j) {
      bool strictly_better = simulated_by(found[i].generator, found[j].generator) &&
                             !simulated_by(found[j].generator, found[i].generator);
      REQUIRE_FALSE(strictly_better);
    }
  }
}

TEST_CASE("propagation for (X a) <-> b with p above q") {
  auto u = std::make_shared<Universe>(std::vector<std::string>{"a", "b"});
  Architecture arch;
  arch.universe = u;
  arch.processes["p"] = {bit(0), bit(1)};
  arch.processes["q"] = {bit(1), bit(0)};
  PrioritizedSpec spec{{parse_ltl("(X a) <-> b", *u)}};
  std::vector<ProcessProblem> problems = {
      {"p", spec, process_arena(arch, "p", std::nullopt)},
      {"q", PrioritizedSpec{{ltl::tt()}}, process_arena(arch, "q", std::nullopt)},
  };
  auto r = propagate(problems, arch.external_inputs(), arch.one_hot, 4);
  REQUIRE(r.success);
  REQUIRE(r.joint);
  CHECK(r.strategies.at("q").output == std::vector<Valuation>(r.joint->size(), 0));
  Arena joint_arena;
  joint_arena.universe = u;
  joint_arena.controlled = bit(0) | bit(1);
  CHECK(check_winning(spec.objectives[0], *r.joint, joint_arena).winning);
}

TEST_CASE("propagation with a single trivial process") {
  fixture::NextAB x;
  Architecture arch;
  arch.universe = x.u;
  arch.processes["p"] = {x.a, x.b};
  std::vector<ProcessProblem> problems = {{"p", PrioritizedSpec{{ltl::tt()}}, process_arena(arch, "p", std::nullopt)}};
  auto r = propagate(problems, arch.external_inputs(), arch.one_hot, 2);
  REQUIRE(r.success);
  CHECK(r.chosen.front().generator.size() == 1);
}

TEST_CASE("propagation fails when the last process has no universal assumption") {
  fixture::NextAB x;
  Architecture arch;
  arch.universe = x.u;
  arch.processes["p"] = {x.a, x.b};
  std::vector<ProcessProblem> problems = {{"p", x.spec(), process_arena(arch, "p", std::nullopt)}};
  auto r = propagate(problems, arch.external_inputs(), arch.one_hot, 4);
  CHECK_FALSE(r.success);
  CHECK(r.failure.find("universal") != std::string::npos);
}
