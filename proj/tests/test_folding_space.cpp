#include "doctest.h"

#include "oracles.hpp"
#include "rnagg/folding_space.hpp"

using namespace rnagg;

namespace {

Lts lts_of(const std::string& s, ExploreLimits lim = {}, Grammar g = {}) {
  return build_lts(oracle::seq(s), g, EnergyModel::nussinov(), lim);
}

}  // namespace

TEST_SUITE("folding_space") {

TEST_CASE("successors keep every match") {
  auto gaaac = successors(SecondaryStructure::empty(oracle::seq("GAAAC")), Grammar{});
  REQUIRE(gaaac.size() == 1);
  CHECK(emit_dot_bracket(gaaac[0].structure) == "(...)");
  CHECK(successors(gaaac[0].structure, Grammar{}).empty());
  CHECK(successors(SecondaryStructure::empty(oracle::seq("GGGAAACCC")), Grammar{}).size() == 18);
}

TEST_CASE("small state spaces") {
  auto a = lts_of("AAAA");
  REQUIRE(a.states.size() == 1);
  CHECK(a.states[0].terminal);
  CHECK(a.transitions.empty());

  auto g = lts_of("GAAAC");
  CHECK(g.states.size() == 2);
  REQUIRE(g.transitions.size() == 1);
  CHECK(to_string(g.transitions[0].rule) == "Hairpin-Rule1");

  // empty + 9 one-pair + 9 two-pair + 1 three-pair
  auto h = lts_of("GGGAAACCC");
  CHECK(h.states.size() == 20);
  CHECK(h.complete());
  auto st = stats(h);
  CHECK(st.depth_histogram == std::vector<std::size_t>{1, 18, 1});
  CHECK(st.terminals == 9);
  CHECK_FALSE(st.fitted_base);
}

TEST_CASE("the LTS is a DAG graded by pair count") {
  auto lts = lts_of("GCGCAAGCGCAU");
  for (const auto& t : lts.transitions) {
    auto d = lts.states[t.to].structure.pair_count() - lts.states[t.from].structure.pair_count();
    CHECK((d == 1 || d == 2));
  }
  std::size_t deepest = 0;
  for (const auto& s : lts.states) {
    deepest = std::max(deepest, s.depth);
    CHECK(validate_structure(s.structure, 3).ok());
    CHECK(s.terminal == successors(s.structure, lts.grammar).empty());
  }
  CHECK(deepest <= 12 / 2);
}

TEST_CASE("minimum energy state") {
  auto h = lts_of("GGGAAACCC");
  auto m = min_energy_state(h);
  CHECK(h.states[m.index].key.key == "(((...)))");
  CHECK(m.observable.value() == -3.0);
  CHECK(m.exact);

  CHECK_THROWS_AS(min_energy_state(lts_of("AAAA")), NoFoldedStateError);

  // two -1.0 states; the smaller dot-bracket wins
  auto tie = lts_of("GAAACAAAC");
  CHECK(tie.states[min_energy_state(tie).index].key.key == "(...)....");
}

TEST_CASE("limits truncate instead of failing") {
  ExploreLimits few;
  // a state is expanded whole or not at all
  few.max_states = 19;
  auto a = lts_of("GGGAAACCC", few);
  CHECK(a.truncated_by == "max_states");
  CHECK(a.states.size() == 19);
  CHECK_FALSE(min_energy_state(a).exact);

  ExploreLimits shallow;
  shallow.max_depth = 1;
  auto b = lts_of("GGGAAACCC", shallow);
  CHECK(b.truncated_by == "max_depth");
  CHECK(b.states.size() == 19);

  ExploreLimits ceiling;
  ceiling.energy_ceiling = -1.5;
  auto c = lts_of("GGGAAACCC", ceiling);
  CHECK_FALSE(c.truncated_by);
  // the one-pair states sit at -1.0; two of them are terminal anyway
  CHECK(c.pruned == 7);
  CHECK_FALSE(c.complete());

  ExploreLimits zero;
  zero.max_states = 0;
  CHECK_THROWS_AS(lts_of("GAAAC", zero), ConfigError);
}

TEST_CASE("DOT export") {
  auto dot = export_lts(lts_of("GAAAC"), ExportFormat::Dot);
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("s0 [label=\".....\\n+inf\"") != std::string::npos);
  CHECK(dot.find("s1 [label=\"(...)\\n-1.0\"") != std::string::npos);
  CHECK(dot.find("s0 -> s1 [label=\"Hairpin-Rule1\"]") != std::string::npos);
  CHECK(dot.find("s2") == std::string::npos);
}

TEST_CASE("JSON export is deterministic and round-trips") {
  auto a = export_lts(lts_of("GGGAAACCC"), ExportFormat::Json);
  auto b = export_lts(lts_of("GGGAAACCC"), ExportFormat::Json);
  CHECK(a == b);
  CHECK(validate_lts_json(a).empty());
  auto back = lts_from_json(a);
  CHECK(back.states.size() == 20);
  CHECK(export_lts(back, ExportFormat::Json) == a);
  CHECK(a.find("\"energy\": null") != std::string::npos);
  CHECK(a.find("\"truncated_by\": null") != std::string::npos);

  CHECK_FALSE(validate_lts_json("{}").empty());
  CHECK_FALSE(validate_lts_json("not json").empty());
  CHECK_THROWS_AS(lts_from_json("{\"sequence\": \"GAAAC\"}"), ParseError);
}

TEST_CASE("state counts grow along a hairpin family") {
  std::vector<SweepPoint> points;
  std::size_t last = 0;
  for (int n = 8; n <= 12; ++n) {
    std::string s = std::string((n - 3) / 2, 'G') + "AAA" + std::string(n - 3 - (n - 3) / 2, 'C');
    auto count = lts_of(s).states.size();
    CHECK(count >= last);
    last = count;
    points.push_back({static_cast<std::size_t>(n), count});
  }
  auto base = fit_exponential_base(points);
  REQUIRE(base);
  CHECK(*base > 1.0);
  CHECK_FALSE(fit_exponential_base({{9, 20}}));
  CHECK(*fit_exponential_base({{1, 2}, {2, 4}, {3, 8}}) == doctest::Approx(2.0));
}

}  // TEST_SUITE
