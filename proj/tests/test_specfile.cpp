#include <catch2/catch_amalgamated.hpp>

#include "domsyn/search.hpp"
#include "domsyn/specfile.hpp"
#include "fixtures.hpp"

using namespace domsyn;

namespace {

std::string example(const std::string& name) { return std::string(DOMSYN_EXAMPLES_DIR) + "/" + name; }

int error_line(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const SpecFileError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const SpecFileError& e) {
    return e.what();
  }
  return {};
}

const char* kMini = R"([architecture]
vars a b
process p inputs a outputs b
)";

}  // namespace

TEST_CASE("side-by-side corpus file") {
  auto f = load_spec(example("sbs.spec"));
  CHECK(f.arch.processes.size() == 2);
  std::size_t objectives = 0;
  for (const auto& [_, s] : f.objectives) objectives += s.objectives.size();
  CHECK(objectives == 3);
  REQUIRE(f.plant);
  CHECK(f.strategies.count("KEEP"));
  CHECK(f.strategies.count("ACC"));

  // The world model matches the hand-built fixture on every short word.
  fixture::SideBySide fx;
  const auto& u = f.universe();
  for (int i = 0; i < u.size(); ++i) REQUIRE(u.name(i) == fx.u->name(i));
  std::vector<Valuation> letters = f.arch.one_hot.letters(fx.ego | fx.other);
  for_each_lasso(letters, 2, 2, [&](const Lasso& w) { REQUIRE(comp(*f.plant, w) == comp(fx.plant, w)); });

  auto arena = f.arena_for({"ego"});
  auto spec = f.spec_for({"ego"});
  auto keep = check_dominant(spec, f.strategies.at("KEEP").transducer, arena);
  REQUIRE_FALSE(keep.dominant);
  CHECK(keep.counterexample->gamma.canonical() == Lasso{{}, {fx.keep_o}});
  CHECK(validate(spec, arena, *keep.counterexample));
  auto acc = check_dominant(spec, f.strategies.at("ACC").transducer, arena);
  REQUIRE_FALSE(acc.dominant);
  CHECK(validate(spec, arena, *acc.counterexample));

  for (const char* name : {"always_keep", "eventually_change", "three_step", "combined"}) {
    INFO(name);
    const auto& a = f.assumptions.at(name);
    REQUIRE(a.annotated);
    CHECK(check_annotation_dominant(spec, a.generator, arena).dominant);
  }
  CHECK(f.assumptions.at("combined").generator.generator.size() == 7);
}

TEST_CASE("(X a) <-> b corpus file") {
  auto f = load_spec(example("xab.spec"));
  CHECK(f.order == std::vector<std::string>{"p", "q"});
  auto joint = f.strategies.at("joint_false");
  CHECK(joint.transducer.inputs == 0);
  CHECK(check_winning(f.spec_for({"p", "q"}).objectives[0], joint.transducer, f.arena_for({"p", "q"})).winning);
  auto spec = f.spec_for({"p"});
  auto arena = f.arena_for({"p"});
  CHECK_FALSE(check_dominant(spec, f.strategies.at("p_copy").transducer, arena).dominant);
  for (const char* name : {"next_a_false", "next_a_true"}) {
    INFO(name);
    CHECK(check_annotation_dominant(spec, f.assumptions.at(name).generator, arena).dominant);
  }
}

TEST_CASE("trivial and three-car corpus files parse") {
  auto t = load_spec(example("trivial.spec"));
  CHECK(check_dominant(t.spec_for({"p"}), t.strategies.at("idle").transducer, t.arena_for({"p"})).dominant);
  auto c = load_spec(example("threecars.spec"));
  CHECK(c.order == std::vector<std::string>{"ego", "other", "ahead"});
  CHECK(c.spec_for({"ahead"}).objectives.size() == 3);
  CHECK(c.arch.external_inputs() == bit(c.universe().index("bend")));
}

TEST_CASE("joint objectives are per-priority conjunctions") {
  auto f = parse_spec(std::string(kMini) + R"(process q inputs b outputs a
[objectives p]
G a
F b
[objectives q]
G b
)");
  auto s = f.spec_for({"p", "q"});
  REQUIRE(s.objectives.size() == 2);
  CHECK(to_string(f.universe(), s.objectives[0]) == "G a & G b");
  CHECK(to_string(f.universe(), s.objectives[1]) == "F b");
  CHECK(f.spec_for({"q"}).objectives.size() == 1);
}

TEST_CASE("spec file errors") {
  CHECK_THROWS_AS(parse_spec(""), SpecFileError);
  CHECK(error_line("\n\n# only a comment\n") == 1);
  CHECK(error_line("vars a\n") == 1);
  CHECK(error_line("[objectives p]\nG a\n") == 1);

  std::string bad_atom = std::string(kMini) + "[objectives p]\nG a\nF speed\n";
  CHECK(error_line(bad_atom) == 6);
  CHECK(error_text(bad_atom).find("'speed'") != std::string::npos);
  CHECK(error_line(std::string(kMini) + "[objectives p]\nG (a &\n") == 5);
  CHECK(error_line(std::string(kMini) + "[objectives r]\ntrue\n") == 4);
  CHECK(error_line(std::string(kMini) + "[bogus]\n") == 4);
  CHECK(error_line("[architecture]\nvars a\nprocess p inputs a outputs c\n") == 3);
  CHECK(error_line("[architecture]\nvars a a\n") == 2);

  // Strategies must cover every legal input letter.
  CHECK(error_text(std::string(kMini) + "[strategy s]\nprocess p\nstate x {}\nnext x a -> x\n")
            .find("no transition") != std::string::npos);
  CHECK(error_line(std::string(kMini) + "[strategy s]\nprocess p\nstate x {a}\n") == 6);
  CHECK(error_line(std::string(kMini) + "[strategy s]\nprocess p\nstate x {}\nnext x * -> y\n") == 7);

  // Assumption structure.
  CHECK(error_line(std::string(kMini) + "[assumption g]\nprocess p\nlabels a\nbranch r -> i\ninput i * -> nowhere\n") ==
        8);
  CHECK(error_text(std::string(kMini) +
                   "[assumption g]\nprocess p\nlabels a\nbranch r -> i j\ninput i * -> r\ninput j * -> r\n"
                   "annotate i {b}\n")
            .find("not annotated") != std::string::npos);
  CHECK(error_line(std::string(kMini) + "[assumption g]\nprocess p\nlabels b\n") == 6);
  CHECK(error_line(std::string(kMini) + "[order]\np > r\n") == 5);
}

TEST_CASE("world models must be total") {
  std::string text = R"([architecture]
vars a b s
process p inputs b s outputs a
process q inputs a s outputs b
plant s
[world]
own a
observed b
state on {s}
state off {}
edge on a -> off
edge off * -> on
)";
  CHECK(error_text(text).find("no transition from 'on'") != std::string::npos);
  auto f = parse_spec(text + "edge on * -> on\n");
  REQUIRE(f.plant);
  CHECK(f.plant->output == std::vector<Valuation>{bit(2), 0});
}
