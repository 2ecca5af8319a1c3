#include "doctest.h"

#include "oracles.hpp"
#include "rnagg/energy.hpp"
#include "rnagg/external.hpp"

using namespace rnagg;
using namespace std::chrono_literals;

namespace {

ExternalEvaluator make(std::string cmd, std::chrono::milliseconds timeout = 5000ms) {
  return ExternalEvaluator({std::move(cmd), timeout, false});
}

ExternalErrorKind failure(ExternalEvaluator& ev, const SecondaryStructure& s) {
  try {
    ev.evaluate(s.sequence(), s);
  } catch (const ExternalError& e) {
    return e.kind();
  }
  FAIL("expected ExternalError");
  return ExternalErrorKind::Failed;
}

}  // namespace

TEST_SUITE("external") {

TEST_CASE("energy values parse leniently but strictly enough") {
  CHECK(parse_energy_value("-1.5") == -1.5);
  CHECK(parse_energy_value("  2.25\n") == 2.25);
  CHECK(parse_energy_value("+3") == 3.0);
  CHECK(parse_energy_value("\xE2\x88\x92" "2.5") == -2.5);
  CHECK_FALSE(parse_energy_value(""));
  CHECK_FALSE(parse_energy_value("abc"));
  CHECK_FALSE(parse_energy_value("1.0 2.0"));
  CHECK_FALSE(parse_energy_value("inf"));
}

TEST_CASE("the command sees sequence and structure, results are cached") {
  auto seq = oracle::seq("GGGAAACCC");
  auto s = parse_dot_bracket(seq, "(((...)))");
  // prints minus the number of '(' in the structure line
  auto ev = make("read s; read d; n=$(printf '%s' \"$d\" | tr -cd '(' | wc -c); echo \"-$n\"");
  CHECK(ev.evaluate(*seq, s) == -3.0);
  CHECK(ev.evaluate(*seq, s) == -3.0);
  CHECK(ev.invocations() == 1);
  CHECK(ev.evaluate(*seq, parse_dot_bracket(seq, ".(.....).")) == -1.0);
  CHECK(ev.invocations() == 2);
}

TEST_CASE("unicode minus on stdout") {
  auto seq = oracle::seq("GAAAC");
  auto ev = make("cat >/dev/null; printf '\\342\\210\\2221.25\\n'");
  CHECK(ev.evaluate(*seq, parse_dot_bracket(seq, "(...)")) == -1.25);
}

TEST_CASE("failure kinds") {
  auto seq = oracle::seq("GAAAC");
  auto s = parse_dot_bracket(seq, "(...)");
  auto missing = make("/nonexistent/evaluator-binary");
  CHECK(failure(missing, s) == ExternalErrorKind::NotFound);
  auto failing = make("cat >/dev/null; echo boom >&2; exit 3");
  CHECK(failure(failing, s) == ExternalErrorKind::Failed);
  auto garbage = make("cat >/dev/null; echo not-a-number");
  CHECK(failure(garbage, s) == ExternalErrorKind::Unparsable);
  auto slow = make("sleep 5", 200ms);
  CHECK(failure(slow, s) == ExternalErrorKind::Timeout);
  CHECK(to_string(ExternalErrorKind::NotFound) == "external-not-found");
}

TEST_CASE("external mode plugs into the observable") {
  auto seq = oracle::seq("GAAAC");
  auto em = EnergyModel::external(
      std::make_shared<ExternalEvaluator>(ExternalEvaluator::Options{"cat >/dev/null; echo 1.5"}));
  CHECK(em.mode() == EnergyMode::External);
  CHECK(observable(parse_dot_bracket(seq, "(...)"), em).value() == 1.5);
  // the open chain never reaches the evaluator
  CHECK_FALSE(observable(SecondaryStructure::empty(seq), em).finite());
  CHECK(em.external()->invocations() == 1);
  CHECK_THROWS_AS(EnergyModel::external(nullptr), ConfigError);
}

}  // TEST_SUITE
