#include <catch2/catch_amalgamated.hpp>

#include "domsyn/search.hpp"
#include "domsyn/specfile.hpp"

using namespace domsyn;

namespace {

struct ThreeCars {
  SpecFile file = load_spec(std::string(DOMSYN_EXAMPLES_DIR) + "/threecars.spec");

  std::vector<ProcessProblem> problems() const {
    std::vector<ProcessProblem> out;
    for (const auto& p : file.order) out.push_back({p, file.spec_for({p}), file.arena_for({p})});
    return out;
  }

  Valuation var(const std::string& n) const { return bit(file.universe().index(n)); }
};

}  // namespace

TEST_CASE("three-car propagation") {
  ThreeCars t;
  auto r = propagate(t.problems(), t.file.arch.external_inputs(), t.file.arch.one_hot, 8);
  INFO(r.failure);
  REQUIRE(r.success);
  for (std::size_t j = 0; j < r.chosen.size(); ++j) {
    INFO(t.file.order[j] << ": " << r.chosen[j].generator.name << " size " << r.chosen[j].generator.size());
    CHECK(r.chosen[j].generator.size() <= 8);
  }
  CHECK(is_universal(r.chosen.back().generator, t.file.arch.one_hot));
  CHECK(r.chosen[0].generator.size() == 4);
  CHECK(r.chosen[2].generator.size() == 7);

  // Extracted joint behaviour on every bend sequence up to stem 4, loop 3.
  const std::vector<std::string> all = {"ego", "other", "ahead"};
  const Arena arena = t.file.arena_for(all);
  const Valuation bend = t.var("bend");
  const Transducer parts = compose(compose(r.strategies.at("ego"), r.strategies.at("other")), r.strategies.at("ahead"));
  std::size_t samples = 0, decelerations = 0;
  for_each_lasso({0, bend}, 4, 3, [&](const Lasso& gamma) {
    ++samples;
    INFO(format_lasso(t.file.universe(), gamma));
    Lasso w = arena.run(*r.joint, gamma);
    REQUIRE(same_word(w, arena.run(parts, gamma)));
    for (const auto& p : all) REQUIRE(evaluate_on_lasso(t.file.spec_for({p}).objectives[0], w));
    for (std::size_t i = 0; i < w.positions(); ++i) {
      if (!(w.at(i) & bend)) continue;
      REQUIRE((w.at(i + 2) & t.var("decel_a")) != 0);
      REQUIRE((w.at(i + 1) & t.var("decel_o")) != 0);
      ++decelerations;
    }
  });
  CHECK(samples >= 200);
  CHECK(decelerations > 0);
}
