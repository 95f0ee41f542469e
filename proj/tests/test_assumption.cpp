#include <catch2/catch_amalgamated.hpp>

#include "domsyn/search.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace domsyn;

namespace {

struct Sbs : fixture::SideBySide {
  LetterSet all() const { return {accel_o, keep_o, decel_o}; }
  LetterSet change() const { return {accel_o, decel_o}; }

  AnnotatedGenerator annotate(AssumptionGenerator g, Valuation out) const {
    std::vector<Valuation> ann(g.inputs.size(), out);
    return {std::move(g), ego, std::move(ann)};
  }

  /// Other keeps its speed forever, as a two-node loop so that the
  /// annotation can alternate.
  AssumptionGenerator always_keep2() const {
    AssumptionGenerator g;
    g.labels = other;
    g.name = "always-keep";
    int b0 = g.add_branch(), b1 = g.add_branch();
    int i0 = g.add_input(), i1 = g.add_input();
    g.promise(b0, i0);
    g.promise(b1, i1);
    g.move(i0, keep_o, b1);
    g.move(i1, keep_o, b0);
    return g;
  }

  /// Root promise k (1..3): keep for k-1 steps, then change.
  AssumptionGenerator three_step() const {
    AssumptionGenerator g;
    g.labels = other;
    g.name = "three-step";
    int root = g.add_branch();
    int u = g.add_branch(), iu = g.add_input();
    g.promise(u, iu);
    for (Valuation v : all()) g.move(iu, v, u);
    for (int k = 1; k <= 3; ++k) {
      int at = root;
      for (int s = 1; s < k; ++s) {
        int i = g.add_input();
        g.promise(at, i);
        at = g.add_branch();
        g.move(i, keep_o, at);
      }
      int i = g.add_input();
      g.promise(at, i);
      for (Valuation v : change()) g.move(i, v, u);
    }
    return g;
  }
};

std::vector<std::vector<std::size_t>> all_sequences(std::size_t max_len, std::size_t max_val) {
  std::vector<std::vector<std::size_t>> out{{}};
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].size() == max_len) continue;
    for (std::size_t v = 0; v <= max_val; ++v) {
      auto s = out[k];
      s.push_back(v);
      out.push_back(s);
    }
  }
  return out;
}

// Word-level check of a generator against lassos: some fair path reads it.
bool in_language(const AssumptionGenerator& g, const Lasso& w) { return accepts(generator_automaton(g), w); }

PathStep promise(std::size_t k) { return {true, k, 0}; }
PathStep letter(Valuation v) { return {false, 0, v}; }

}  // namespace

TEST_CASE("unary codec") {
  CHECK(encode_unary({2, 1, 0}) == "001011");
  CHECK(encode_unary({}).empty());
  CHECK(encode_unary({0}) == "1");
  std::size_t n = 0;
  for (const auto& s : all_sequences(5, 4)) {
    auto code = encode_unary(s);
    auto back = decode_unary(code);
    REQUIRE(back.values == s);
    REQUIRE(back.remainder.empty());
    REQUIRE(encode_unary(decode_unary(code).values) == code);
    ++n;
  }
  CHECK(n == 1 + 5 + 25 + 125 + 625 + 3125);
  auto partial = decode_unary("01000");
  CHECK(partial.values == std::vector<std::size_t>{1});
  CHECK(partial.remainder == "000");
  CHECK_THROWS_AS(decode_unary("012"), GeneratorError);
}

TEST_CASE("contains_path on the always-keep generator") {
  Sbs f;
  auto g = shapes::invariant(f.other, {f.keep_o});
  CHECK(contains_path(g, {}));
  CHECK(contains_path(g, {promise(1), letter(f.keep_o), promise(1), letter(f.keep_o)}));
  CHECK_FALSE(contains_path(g, {promise(1), letter(f.accel_o)}));
  CHECK_FALSE(contains_path(g, {promise(2)}));
  CHECK_THROWS_AS(contains_path(g, {letter(f.keep_o)}), GeneratorError);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("annotation dominance in the side-by-side example") {
  Sbs f;
  auto arena = f.ego_arena();
  auto spec = f.spec();
  auto eventually = shapes::eventually(f.other, f.all(), f.change());
  CHECK(check_annotation_dominant(spec, f.annotate(eventually, f.keep_e), arena).dominant);
  CHECK_FALSE(check_annotation_dominant(spec, f.annotate(eventually, f.accel_e), arena).dominant);

  auto keep2 = f.annotate(f.always_keep2(), f.accel_e);
  keep2.annotation[1] = f.decel_e;
  CHECK(check_annotation_dominant(spec, keep2, arena).dominant);
  auto v = check_annotation_dominant(spec, f.annotate(f.always_keep2(), f.keep_e), arena);
  REQUIRE_FALSE(v.dominant);
  CHECK(validate(spec, arena, *v.counterexample));

  auto three = f.three_step();
  CHECK_NOTHROW(three.validate());
  CHECK(check_annotation_dominant(spec, f.annotate(three, f.keep_e), arena).dominant);
  CHECK_THROWS_AS(check_annotation_dominant(spec, AnnotatedGenerator{three, f.other, {}}, arena), InterfaceError);
}

TEST_CASE("three-step generator matches the within shape on lassos") {
  Sbs f;
  auto a = f.three_step();
  auto b = shapes::within(f.other, f.all(), f.change(), 3);
  for_each_lasso(f.all(), 4, 2, [&](const Lasso& w) { REQUIRE(in_language(a, w) == in_language(b, w)); });
  CHECK(simulated_by(a, b));
}

TEST_CASE("simulation preorder") {
  Sbs f;
  std::vector<AssumptionGenerator> gs = base_shapes(f.other, f.all(), 4);
  gs.push_back(f.three_step());
  gs.push_back(f.always_keep2());
  for (std::size_t a = 0; a < gs.size(); ++a) {
    REQUIRE(simulated_by(gs[a], gs[a]));
    for (std::size_t b = 0; b < gs.size(); ++b) {
      for (std::size_t c = 0; c < gs.size(); ++c) {
        if (simulated_by(gs[a], gs[b]) && simulated_by(gs[b], gs[c])) REQUIRE(simulated_by(gs[a], gs[c]));
      }
      if (!simulated_by(gs[a], gs[b])) continue;
      // Simulation implies language inclusion.
      for_each_lasso(f.all(), 2, 2, [&](const Lasso& w) {
        if (in_language(gs[a], w)) REQUIRE(in_language(gs[b], w));
      });
    }
  }
}

TEST_CASE("universality") {
  Sbs f;
  CHECK(is_universal(universal_generator(f.other, f.one_hot), f.one_hot));
  CHECK_FALSE(is_universal(shapes::invariant(f.other, {f.keep_o}), f.one_hot));
  CHECK_FALSE(is_universal(shapes::eventually(f.other, f.all(), f.change()), f.one_hot));
  // Both branches together cover every word, but the choice needs the future.
  CHECK_FALSE(is_universal(shapes::never_or_eventually(f.other, f.all(), f.change()), f.one_hot));
  CHECK(is_universal(shapes::history(f.other, f.all(), 1), f.one_hot));
  auto combined = shapes::combine(shapes::invariant(f.other, {f.keep_o}), shapes::invariant(f.other, f.change()));
  CHECK_FALSE(is_universal(combined, f.one_hot));
}

TEST_CASE("compatibility") {
  Sbs f;
  // Lower process: controls other's actions and reads nothing.
  auto lower = [&](std::vector<Valuation> outs) {
    AssumptionGenerator g;
    g.name = "lower";
    const int n = static_cast<int>(outs.size());
    for (int k = 0; k < n; ++k) g.add_branch();
    for (int k = 0; k < n; ++k) {
      int i = g.add_input();
      g.promise(k, i);
      g.move(i, 0, (k + 1) % n);
    }
    return AnnotatedGenerator{g, f.other, outs};
  };
  auto eventually = shapes::eventually(f.other, f.all(), f.change());
  auto within2 = shapes::within(f.other, f.all(), f.change(), 2);

  CHECK(check_compatible(lower({f.decel_o, f.accel_o}), within2, f.one_hot).compatible);
  CHECK(check_compatible(lower({f.keep_o, f.decel_o}), within2, f.one_hot).compatible);
  CHECK_FALSE(check_compatible(lower({f.keep_o, f.keep_o, f.accel_o}), within2, f.one_hot).compatible);
  auto bad = check_compatible(lower({f.keep_o}), eventually, f.one_hot);
  CHECK_FALSE(bad.compatible);
  CHECK_FALSE(bad.trace.empty());
  CHECK(check_compatible(lower({f.keep_o}), universal_generator(f.other, f.one_hot), f.one_hot).compatible);

  // Every enumerated generator against the universal one, annotated with
  // each constant.
  for (const auto& g : base_shapes(f.other, f.all(), 4)) {
    for (Valuation e : {f.accel_e, f.keep_e}) {
      auto ag = f.annotate(g, e);
      auto higher = universal_generator(ag.outputs, f.one_hot);
      REQUIRE(check_compatible(ag, higher, f.one_hot).compatible);
    }
  }
}

TEST_CASE("compatibility resolves promises from the lower process's choices") {
  Sbs f;
  // The lower process may keep for a while (pending) and then accelerates;
  // the higher process waits for a change.
  AssumptionGenerator two;
  two.name = "choice";
  int r = two.add_branch(), k = two.add_input(true), c = two.add_input();
  two.promise(r, k);
  two.promise(r, c);
  two.move(k, 0, r);
  int end = two.add_branch(), e = two.add_input();
  two.promise(end, e);
  two.move(e, 0, end);
  two.move(c, 0, end);
  AnnotatedGenerator lower{two, f.other, {f.keep_o, f.accel_o, f.keep_o}};
  auto higher = shapes::eventually(f.other, f.all(), f.change());
  CompatibilityGame game(lower, higher, f.one_hot);
  REQUIRE(game.compatible());
  CHECK(game.resolve(k, higher.root) == 0);
  CHECK(game.resolve(c, higher.root) == 0);
}
