#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "crosscheck.hpp"
#include "fixtures.hpp"

using namespace domsyn;

namespace {

bool same(const Transducer& x, const Transducer& y) {
  return x.inputs == y.inputs && x.outputs == y.outputs && x.initial == y.initial &&
         x.output == y.output && x.next == y.next;
}

std::vector<Valuation> other_letters(const fixture::SideBySide& f) {
  return {f.accel_o, f.keep_o, f.decel_o};
}

}  // namespace

TEST_CASE("achievability for the trivial spec accepts everything") {
  fixture::NextAB x;
  auto ach = achievability_automaton(PrioritizedSpec{{ltl::tt()}}, 1, x.arena(x.b));
  for_each_lasso(oracle::full_alphabet(1), 3, 2, [&](const Lasso& g) { REQUIRE(accepts(ach, g)); });
}

TEST_CASE("side-by-side achievability matches exhaustive output completion") {
  fixture::SideBySide f;
  auto arena = f.ego_arena();
  auto spec = f.spec();
  auto ach1 = achievability_automaton(spec, 1, arena);
  auto ach2 = achievability_automaton(spec, 2, arena);
  const std::vector<Valuation> ego = {f.accel_e, f.keep_e, f.decel_e};
  for_each_lasso(other_letters(f), 3, 2, [&](const Lasso& g) {
    std::size_t best = 0;
    for_each_lasso(ego, 3, 2, [&](const Lasso& o) {
      best = std::max(best, achieved_priority_on_word(spec, arena.word(g, o)));
    });
    INFO(format_lasso(*f.u, g));
    REQUIRE(accepts(ach1, g) == (best >= 1));
    REQUIRE(accepts(ach2, g) == (best >= 2));
    REQUIRE(accepts(ach2, g) == oracle::sat(parse_ltl("F !keep_o", *f.u), g));
  });
}

TEST_CASE("check_winning") {
  fixture::NextAB x;
  auto joint_false = Transducer::constant(0, x.a | x.b, 0);
  CHECK(check_winning(x.spec().objectives[0], joint_false, x.arena(x.a | x.b)).winning);

  fixture::SideBySide f;
  auto v = check_winning(f.spec().objectives[0], f.keep(), f.ego_arena());
  REQUIRE_FALSE(v.winning);
  CHECK(v.gamma->canonical() == Lasso{{}, {f.keep_o}});
  CHECK(check_winning(ltl::tt(), f.acc(), f.ego_arena()).winning);
}

TEST_CASE("KEEP forever is not dominant in the side-by-side example") {
  fixture::SideBySide f;
  auto arena = f.ego_arena();
  auto v = check_dominant(f.spec(), f.keep(), arena);
  REQUIRE_FALSE(v.dominant);
  const auto& c = *v.counterexample;
  CHECK(c.gamma == Lasso{{}, {f.keep_o}});
  CHECK(c.k == 0);
  CHECK(c.m == 1);
  bool deviates = false;
  for (std::size_t i = 0; i < c.better.positions(); ++i) deviates |= c.better.at(i) != f.keep_e;
  CHECK(deviates);
  CHECK(validate(f.spec(), arena, c));
}

TEST_CASE("ACC is not dominant in the side-by-side example") {
  fixture::SideBySide f;
  auto arena = f.ego_arena();
  auto v = check_dominant(f.spec(), f.acc(), arena);
  REQUIRE_FALSE(v.dominant);
  const auto& c = *v.counterexample;
  CHECK(c.gamma == Lasso{{f.accel_o}, {f.keep_o}});
  CHECK(c.k == 0);
  CHECK(validate(f.spec(), arena, c));
}

TEST_CASE("brute force reproduces the KEEP counterexample") {
  fixture::SideBySide f;
  auto v = brute_force_dominance(f.spec(), f.keep(), f.ego_arena(), 2, 1);
  REQUIRE_FALSE(v.dominant);
  CHECK(validate(f.spec(), f.ego_arena(), *v.counterexample));
  auto t = brute_force_dominance(PrioritizedSpec{{ltl::tt()}}, f.keep(), f.ego_arena(), 2, 1);
  CHECK(t.dominant);
  CHECK_THROWS_AS(brute_force_dominance(f.spec(), f.keep(), f.ego_arena(), 9, 9), BoundExceeded);
}

TEST_CASE("check_dominant agrees with brute force on random small instances") {
  std::mt19937 rng(43);
  for (int i = 0; i < 150; ++i) {
    auto r = crosscheck::run_one(rng);
    INFO(r.detail);
    REQUIRE(r.agree);
  }
}

TEST_CASE("winning strategies are dominant") {
  std::mt19937 rng(47);
  fixture::NextAB x;
  auto arena = x.arena(x.b);
  int winning = 0;
  for (int i = 0; i < 300; ++i) {
    PrioritizedSpec spec;
    for (int k = 0; k < 2; ++k) spec.objectives.push_back(oracle::random_formula(rng, 2, 2));
    auto s = crosscheck::random_transducer(rng, x.a, x.b);
    if (!check_winning(partial_conjunction(spec, 2), s, arena).winning) continue;
    ++winning;
    REQUIRE(check_dominant(spec, s, arena).dominant);
  }
  CHECK(winning > 10);
}

TEST_CASE("synthesize_winning_bounded") {
  fixture::NextAB x;
  auto r = synthesize_winning_bounded(x.spec().objectives[0], x.arena(x.a | x.b), 0, 1);
  REQUIRE(r.found());
  CHECK(r.transducer->size() == 1);
  CHECK(r.transducer->output[0] == 0);
  CHECK(synthesize_winning_bounded(ltl::tt(), x.arena(x.b), x.a, 1).found());

  fixture::SideBySide f;
  auto none = synthesize_winning_bounded(f.spec().objectives[0], f.ego_arena(), f.ego_inputs(), 2);
  CHECK_FALSE(none.found());
  CHECK(none.bound == 2);
}

TEST_CASE("synthesize_dominant_bounded") {
  fixture::NextAB x;
  CHECK_FALSE(synthesize_dominant_bounded(x.spec(), x.arena(x.b), x.a, 3).found());
  CHECK(synthesize_dominant_bounded(PrioritizedSpec{{ltl::tt()}}, x.arena(x.b), x.a, 1).found());

  fixture::SideBySide f;
  auto arena = f.ego_arena();
  arena.assumption = lasso_automaton(Lasso{{}, {f.keep_o}}, arena.env());
  auto r = synthesize_dominant_bounded(f.spec(), arena, f.ego_inputs(), 2);
  REQUIRE(r.found());
  CHECK(check_dominant(f.spec(), *r.transducer, arena).dominant);
  Lasso run = arena.run(*r.transducer, Lasso{{}, {f.keep_o}});
  bool changes = false;
  for (std::size_t i = 0; i < run.positions(); ++i) changes |= (run.at(i) & f.keep_e) == 0;
  CHECK(changes);
}

TEST_CASE("enumeration yields pairwise non-isomorphic canonical transducers") {
  fixture::NextAB x;
  auto arena = x.arena(x.b);
  std::vector<Transducer> seen;
  PrioritizedSpec spec{{ltl::tt()}};
  detail::Enumerator e(
      spec, arena, x.a, [](const BuchiAutomaton&) { return std::optional<std::pair<Lasso, std::size_t>>(); },
      [&](const Transducer& t) {
        seen.push_back(t);
        return false;
      });
  CHECK_FALSE(e.run(2).has_value());
  // 2 one-state machines; 4 output pairs x 3 reaching maps x 4 maps for state 1.
  CHECK(seen.size() == 2 + 48);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(same(normalized(seen[i]), seen[i]));
    for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(same(seen[i], seen[j]));
  }
}

TEST_CASE("pruned synthesis returns the first passing transducer of the plain enumeration") {
  fixture::NextAB x;
  auto arena = x.arena(x.b);
  std::mt19937 rng(53);
  auto never = [](const BuchiAutomaton&) { return std::optional<std::pair<Lasso, std::size_t>>(); };
  for (int i = 0; i < 60; ++i) {
    PrioritizedSpec spec;
    int n = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int k = 0; k < n; ++k) spec.objectives.push_back(oracle::random_formula(rng, 2, 3));
    INFO(to_string(*x.u, spec.objectives[0]));

    detail::Enumerator plain_dom(spec, arena, x.a, never, [&](const Transducer& t) {
      return check_dominant(spec, t, arena).dominant;
    });
    auto expected = plain_dom.run(2);
    auto got = synthesize_dominant_bounded(spec, arena, x.a, 2);
    REQUIRE(expected.has_value() == got.found());
    if (expected) REQUIRE(same(*expected, *got.transducer));

    auto f = spec.objectives[0];
    detail::Enumerator plain_win(spec, arena, x.a, never, [&](const Transducer& t) {
      return check_winning(f, t, arena).winning;
    });
    auto expected_win = plain_win.run(2);
    auto got_win = synthesize_winning_bounded(f, arena, x.a, 2);
    REQUIRE(expected_win.has_value() == got_win.found());
    if (expected_win) REQUIRE(same(*expected_win, *got_win.transducer));
  }
}
