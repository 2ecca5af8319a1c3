#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "rnagg/energy.hpp"
#include "rnagg/format.hpp"

using namespace rnagg;

namespace {

const LoopTableParams& example() {
  static const auto p = load_parameters_file(RNAGG_DATA_DIR "/example_loop_table.ini");
  return p;
}

double table_energy(const std::string& seq, const std::string& db) {
  return energy(parse_dot_bracket(oracle::seq(seq), db), EnergyModel::loop_table(example()));
}

/// A parameter file with every stack entry zero except `overrides`.
std::string params_text(const std::map<std::string, std::string>& overrides,
                        const std::string& tail = "") {
  static const char* types[] = {"AU", "CG", "GC", "UA", "GU", "UG"};
  std::string out = "[stack]\n";
  for (auto o : types) {
    for (auto i : types) {
      std::string key = std::string(o) + "-" + i;
      auto it = overrides.find(key);
      out += key + " = " + (it == overrides.end() ? "0" : it->second) + "\n";
    }
  }
  out += "[hairpin]\nvalues = 1 2 3\n[bulge]\nvalues = 1\n[internal]\nvalues = 1 1\n";
  out += "[multibranch]\na = 3\nb = 0.5\nc = 0.25\n";
  return out + tail;
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("loop decomposition of a simple hairpin stem") {
  auto s = parse_dot_bracket(oracle::seq("GGGAAACCC"), "(((...)))");
  auto d = decompose_loops(s);
  REQUIRE(d.loops.size() == 4);
  CHECK(d.loops[0].type == LoopType::Exterior);
  CHECK_FALSE(d.loops[0].closing);
  CHECK(d.loops[1].type == LoopType::Stack);
  CHECK(d.loops[2].type == LoopType::Stack);
  CHECK(d.loops[3].type == LoopType::Hairpin);
  CHECK(d.loops[3].unpaired == 3);
}

TEST_CASE("loop types by gap pattern") {
  auto kind = [](const std::string& seq, const std::string& db, std::size_t k) {
    return decompose_loops(parse_dot_bracket(oracle::seq(seq), db)).loops[k].type;
  };
  CHECK(kind("GAGAAACC", "(.(...))", 1) == LoopType::Bulge);
  CHECK(kind("GAGAAACUC", "(.(...).)", 1) == LoopType::Internal);
  CHECK(kind("GGGAAACCAGGAAACCC", "(((...)).((...)))", 1) == LoopType::MultiBranch);
}

TEST_CASE("nussinov energy counts pairs") {
  auto seq = oracle::seq("GGGAAACCC");
  auto nus = EnergyModel::nussinov();
  CHECK(energy(parse_dot_bracket(seq, "(((...)))"), nus) == -3.0);
  CHECK(energy(parse_dot_bracket(seq, ".(.....)."), nus) == -1.0);
  CHECK_FALSE(observable(SecondaryStructure::empty(seq), nus).finite());
  CHECK(observable(parse_dot_bracket(seq, "(((...)))"), nus).value() == -3.0);
}

TEST_CASE("example table hand sums") {
  // two GC/GC stacks (-3.0 each) and a 3-hairpin (5.4)
  CHECK(table_energy("GGGAAACCC", "(((...)))") == doctest::Approx(-0.6));
  // 1-bulge 3.8 + 3-hairpin 5.4
  CHECK(table_energy("GAGAAACC", "(.(...))") == doctest::Approx(9.2));
  // 1x1 internal loop (total 2) 0.5 + 3-hairpin 5.4
  CHECK(table_energy("GAGAAACUC", "(.(...).)") == doctest::Approx(5.9));
  // multiloop 3.4 + 2*0.4 + 0*1, plus two arms of (-3.0 + 5.4)
  CHECK(table_energy("GGGAAACCAGGAAACCC", "(((...)).((...)))") == doctest::Approx(9.0));
  // the exterior loop is free
  CHECK(table_energy("AGGGAAACCCA", ".(((...))).") == doctest::Approx(-0.6));
}

TEST_CASE("stack entries are indexed outer then inner, read 5' to 3'") {
  auto p = load_parameters(params_text({{"GC-AU", "-9"}, {"UA-CG", "-1"}}));
  auto em = EnergyModel::loop_table(p);
  // outer G-C, inner A-U, hairpin of 3 (table value 3)
  CHECK(energy(parse_dot_bracket(oracle::seq("GAAAAUC"), "((...))"), em) == doctest::Approx(-6.0));
  // the reverse reading UA-CG is a different entry
  CHECK(energy(parse_dot_bracket(oracle::seq("UCAAAGA"), "((...))"), em) == doctest::Approx(2.0));
}

TEST_CASE("multibranch coefficients") {
  auto em = EnergyModel::loop_table(load_parameters(params_text({})));
  // a=3, b=0.5 per branch (2), c=0.25 per unpaired (1), two 3-hairpins (3 each)
  CHECK(energy(parse_dot_bracket(oracle::seq("GGAAACAGAAACC"), "((...).(...))"), em) ==
        doctest::Approx(3 + 1.0 + 0.25 + 6));
}

TEST_CASE("length penalties extrapolate logarithmically") {
  std::vector<double> t{1.0, 2.0};
  CHECK(length_penalty(t, 1) == 1.0);
  CHECK(length_penalty(t, 2) == 2.0);
  CHECK(length_penalty(t, 4) == doctest::Approx(2.0 + kLoopExtrapolation * std::log(2.0)));
  CHECK_THROWS_AS(length_penalty({}, 1), ConfigError);
  CHECK(example().hairpin.size() == 30);
}

TEST_CASE("parameter file errors") {
  CHECK_NOTHROW(load_parameters(params_text({})));
  CHECK_THROWS_WITH_AS(load_parameters(params_text({}, "[bogus]\nx = 1\n")),
                       doctest::Contains("unknown section"), ParseError);
  CHECK_THROWS_AS(load_parameters(params_text({{"GC-AU", "abc"}})), ParseError);
  auto text = params_text({});
  auto cut = text.find("UG-UG = 0\n");
  REQUIRE(cut != std::string::npos);
  auto missing = text;
  missing.erase(cut, std::string("UG-UG = 0\n").size());
  CHECK_THROWS_WITH_AS(load_parameters(missing), doctest::Contains("wrong array length"),
                       ParseError);
  CHECK_THROWS_AS(load_parameters("[stack]\nGA-UC = 1\n"), ParseError);
  CHECK_THROWS_AS(load_parameters_file("/nonexistent/params.ini"), ParseError);
}

TEST_CASE("every pair closes one loop and positions are partitioned") {
  for (const std::string f : {"GGGAAACCC", "GGACGACAC", "GCGCAUAUGC"}) {
    auto seq = oracle::seq(f);
    for (const auto& db : oracle::all_structures(*seq, 1)) {
      auto s = parse_dot_bracket(seq, db, {true, 1});
      auto d = decompose_loops(s);
      int unpaired = 0, exterior = 0;
      std::map<BasePair, int> closes;
      for (const auto& l : d.loops) {
        unpaired += l.unpaired;
        if (l.closing) ++closes[*l.closing];
        else ++exterior;
      }
      CHECK(exterior == 1);
      CHECK(unpaired + 2 * static_cast<int>(s.pair_count()) == static_cast<int>(f.size()));
      CHECK(closes.size() == s.pair_count());
      for (const auto& [p, c] : closes) CHECK(c == 1);
    }
  }
}

TEST_CASE("energy formatting") {
  CHECK(format_energy(-3.0) == "-3.0");
  CHECK(format_energy(-0.6) == "-0.6");
  CHECK(format_energy(4.25) == "4.25");
  CHECK(format_energy(2.604) == "2.6");
  CHECK(format_energy(-0.001) == "0.0");
  CHECK(format_energy(INFINITY) == "+inf");
  CHECK(format_observable(Observable::unfolded()) == "+inf");
}

}  // TEST_SUITE
