#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct Out {
  int code;
  std::string out;
  std::string err;
};

Out cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rnagg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = rnagg::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rnagg_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kTable = RNAGG_DATA_DIR "/example_loop_table.ini";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fold summaries") {
  auto a = cli({"fold", "--seq", "AAAA", "--energy", "nussinov"});
  CHECK(a.code == 0);
  CHECK(a.out == "....  +inf (no fold possible)\n");

  // greedy lands on a terminal two-pair structure; reverse steps reach the optimum
  auto g = cli({"fold", "--seq", "GGGAAACCC", "--energy", "nussinov"});
  CHECK(g.code == 0);
  CHECK(g.out == "((....)).  -2.0\n");
  auto inv = cli({"fold", "--seq", "GGGAAACCC", "--energy", "nussinov", "--allow-inverse"});
  CHECK(inv.out.rfind("(((...)))  -3.0\n", 0) == 0);

  CHECK(cli({"fold", "--seq", "@/nonexistent/missing.fa"}).code == 2);
  CHECK(cli({"fold", "--seq", "GAXAC"}).code == 2);
  CHECK(cli({"fold"}).code == 2);
  CHECK(cli({"fold", "--seq", "GAAAC", "--energy", "loop-table"}).code == 2);
  CHECK(cli({"fold", "--seq", "GAAAC", "--min-hairpin", "0"}).code == 2);
}

TEST_CASE("fold trace goes to a file") {
  auto path = temp_path("trace.jsonl");
  auto r = cli({"fold", "--seq", "GAAAC", "--trace", path});
  CHECK(r.code == 0);
  auto text = slurp(path);
  CHECK(text.find("\"note\":\"initial\"") != std::string::npos);
  CHECK(text.find("{\"summary\":") != std::string::npos);
  std::remove(path.c_str());

  auto stdout_trace = cli({"fold", "--seq", "GAAAC", "--trace", "-"});
  CHECK(stdout_trace.out.find("\"db\":\"(...)\"") != std::string::npos);
}

TEST_CASE("fold with a machine file and sequence files") {
  auto r = cli({"fold", "--seq", "GGGAAACCCAGGGAAACCC", "--energy", "loop-table", "--params", kTable,
                "--machine", RNAGG_DATA_DIR "/two_state_machine.json"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("(((...))).(((...)))  -1.2", 0) == 0);

  auto fa = temp_path("batch.fa");
  std::ofstream(fa) << ">one\nGAAAC\n>two\nAAAA\n";
  auto b = cli({"fold", "--seq-file", fa});
  CHECK(b.code == 0);
  CHECK(b.out == ">one\n(...)  -1.0\n>two\n....  +inf (no fold possible)\n");
  std::remove(fa.c_str());

  CHECK(cli({"fold", "--seq", "GAAAC", "--machine", "/nonexistent.json"}).code == 2);
}

TEST_CASE("enumerate") {
  auto j = cli({"enumerate", "--seq", "GGGAAACCC", "--export", "json"});
  CHECK(j.code == 0);
  CHECK(j.err == "states=20 transitions=51 terminals=9 depth=1,18,1 truncated_by=none\n");
  CHECK(j.out.find("\"states\"") != std::string::npos);

  auto d = cli({"enumerate", "--seq", "GAAAC", "--export", "dot"});
  CHECK(d.code == 0);
  CHECK(d.out.find("s1 [label=\"(...)") != std::string::npos);
  CHECK(d.out.find("s2 [") == std::string::npos);

  auto big = cli({"enumerate", "--seq", "GGGGAAACCCCAGGGGAAACCCCAGGAAACC", "--max-states", "100",
                  "--export", "json"});
  CHECK(big.code == 3);
  CHECK(big.out.find("\"truncated_by\": \"max_states\"") != std::string::npos);

  auto path = temp_path("lts.json");
  auto f = cli({"enumerate", "--seq", "GGGAAACCC", "--out", path});
  CHECK(f.code == 0);
  CHECK(f.out.find("states=20") == 0);
  auto again = cli({"enumerate", "--seq", "GGGAAACCC", "--export", "json"});
  CHECK(slurp(path) == again.out);
  std::remove(path.c_str());

  CHECK(cli({"enumerate", "--seq", "GAAAC", "--export", "xml"}).code == 2);
}

TEST_CASE("eval") {
  auto n = cli({"eval", "--seq", "GGGAAACCC", "--db", "(((...)))", "--energy", "nussinov"});
  CHECK(n.code == 0);
  CHECK(n.out.find("total -3.0\n") != std::string::npos);

  auto t = cli({"eval", "--seq", "GGGAAACCC", "--db", "(((...)))", "--energy", "loop-table",
                "--params", kTable});
  CHECK(t.code == 0);
  CHECK(t.out.find("total -0.6\n") != std::string::npos);
  CHECK(t.out.find("Hairpin") != std::string::npos);

  auto x = cli({"eval", "--seq", "GGGGAAACCCC", "--db", "(([.....)])"});
  CHECK(x.code == 2);
  CHECK(x.err.find("crossing") != std::string::npos);

  CHECK(cli({"eval", "--seq", "GGGAAACCC", "--db", "((("}).code == 2);
}

TEST_CASE("rules") {
  auto all = cli({"rules"});
  CHECK(all.code == 0);
  CHECK(std::count(all.out.begin(), all.out.end(), '\n') == 11);
  auto h = cli({"rules", "--loop", "hairpin"});
  CHECK(std::count(h.out.begin(), h.out.end(), '\n') == 1);
  CHECK(h.out.rfind("Hairpin-Rule1", 0) == 0);
  CHECK(cli({"rules", "--loop", "unknown"}).code == 2);
}

TEST_CASE("help and usage") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

}  // TEST_SUITE
