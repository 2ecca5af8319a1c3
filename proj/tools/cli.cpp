#include "cli.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "rnagg/controller.hpp"
#include "rnagg/energy.hpp"
#include "rnagg/external.hpp"
#include "rnagg/folding_space.hpp"
#include "rnagg/format.hpp"
#include "rnagg/grammar.hpp"
#include "rnagg/structure.hpp"

namespace rnagg::cli {
namespace {

struct Common {
  std::string seq;
  std::string seq_file;
  std::string energy = "nussinov";
  std::string params;
  std::string external_cmd;
  int external_timeout_ms = 10'000;
  int min_hairpin = 3;
  bool allow_inverse = false;
};

void add_sequence_options(CLI::App& cmd, Common& c, bool batch) {
  cmd.add_option("--seq", c.seq, "Sequence, inline or @file (FASTA or plain)");
  if (batch) {
    cmd.add_option("--seq-file", c.seq_file, "FASTA file; every record is processed");
  }
}

void add_model_options(CLI::App& cmd, Common& c) {
  cmd.add_option("--energy", c.energy, "Energy model")
      ->check(CLI::IsMember({"nussinov", "loop-table", "external"}));
  cmd.add_option("--params", c.params, "Loop-table parameter file (INI)");
  cmd.add_option("--external-cmd", c.external_cmd,
                 std::string("External evaluator command (default: $") + kExternalCmdEnv + ")");
  cmd.add_option("--external-timeout", c.external_timeout_ms, "External evaluator timeout, ms")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--min-hairpin", c.min_hairpin, "Minimum unpaired bases in a hairpin")
      ->check(CLI::Range(1, 1000));
  cmd.add_flag("--allow-inverse", c.allow_inverse, "Allow reverse steps during adaptation");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<PrimarySequence> load_sequences(const Common& c, bool batch) {
  const bool inline_seq = !c.seq.empty();
  const bool file_seq = !c.seq_file.empty();
  if (inline_seq == file_seq) {
    throw ConfigError(batch ? "exactly one of --seq and --seq-file is required"
                            : "--seq is required");
  }
  if (file_seq) return parse_sequences(read_file(c.seq_file));
  if (c.seq.front() == '@') return {parse_sequence(read_file(c.seq.substr(1)))};
  return {parse_sequence(c.seq)};
}

Grammar make_grammar(const Common& c) {
  Grammar g;
  g.min_hairpin_unpaired = c.min_hairpin;
  g.allow_inverse = c.allow_inverse;
  return g;
}

EnergyModel make_energy(const Common& c) {
  if (c.energy != "loop-table" && !c.params.empty()) {
    throw ConfigError("--params only applies to --energy loop-table");
  }
  if (c.energy != "external" && !c.external_cmd.empty()) {
    throw ConfigError("--external-cmd only applies to --energy external");
  }
  if (c.energy == "loop-table") {
    if (c.params.empty()) throw ConfigError("--energy loop-table needs --params");
    return EnergyModel::loop_table(load_parameters_file(c.params));
  }
  if (c.energy == "external") {
    std::string cmd = c.external_cmd;
    if (cmd.empty()) {
      if (const char* env = std::getenv(kExternalCmdEnv)) cmd = env;
    }
    if (cmd.empty()) {
      throw ConfigError(std::string("--energy external needs --external-cmd or $") + kExternalCmdEnv);
    }
    ExternalEvaluator::Options opts;
    opts.command = cmd;
    opts.timeout = std::chrono::milliseconds(c.external_timeout_ms);
    return EnergyModel::external(std::make_shared<ExternalEvaluator>(opts));
  }
  return EnergyModel::nussinov();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

// fold ---------------------------------------------------------------------

struct FoldOpts {
  std::string machine;
  std::string trace;
  RunLimits limits;
  std::uint64_t seed = 0;
};

int cmd_fold(const Common& c, const FoldOpts& f, std::ostream& out) {
  auto records = load_sequences(c, true);
  auto grammar = make_grammar(c);
  auto energy = make_energy(c);
  auto sb = f.machine.empty() ? SBModel::greedy_default() : load_sb_model_file(f.machine);
  auto registry = StrategyRegistry::with_builtins();
  sb.check_strategies(registry);

  std::string traces;
  for (const auto& rec : records) {
    auto seq = std::make_shared<const PrimarySequence>(rec);
    auto trace = run(sb, seq, grammar, energy, f.limits, registry);
    traces += trace.to_jsonl();

    const auto& s = trace.summary;
    if (records.size() > 1 || !rec.name().empty()) out << ">" << rec.name() << "\n";
    // The run's answer is the lowest structure it met; the final one is
    // shown too when adaptation wandered away from it.
    out << s.best_db << "  " << format_observable(s.best_observable);
    if (!s.best_observable.finite()) out << " (no fold possible)";
    out << "\n";
    if (s.final_db != s.best_db) {
      out << s.final_db << "  " << format_observable(s.final_observable) << " (final)\n";
    }
  }
  if (!f.trace.empty()) write_output(f.trace, traces, out);
  return kExitOk;
}

// enumerate ----------------------------------------------------------------

struct EnumerateOpts {
  std::string format = "json";
  std::string out;
  std::size_t max_states = ExploreLimits{}.max_states;
  std::size_t max_depth = ExploreLimits{}.max_depth;
  double time_budget = 0.0;
  std::optional<double> energy_ceiling;
};

int cmd_enumerate(const Common& c, const EnumerateOpts& e, std::ostream& out, std::ostream& err) {
  auto seq = std::make_shared<const PrimarySequence>(load_sequences(c, false).front());
  ExploreLimits lim;
  lim.max_states = e.max_states;
  lim.max_depth = e.max_depth;
  if (e.time_budget > 0) lim.time_budget = std::chrono::duration<double>(e.time_budget);
  lim.energy_ceiling = e.energy_ceiling;

  auto lts = build_lts(seq, make_grammar(c), make_energy(c), lim);
  auto text = export_lts(lts, e.format == "dot" ? ExportFormat::Dot : ExportFormat::Json);
  const bool to_stdout = e.out.empty() || e.out == "-";
  write_output(e.out, text, out);
  (to_stdout ? err : out) << format_stats_line(stats(lts), lts) << "\n";
  return lts.truncated_by ? kExitTruncated : kExitOk;
}

// eval ---------------------------------------------------------------------

int cmd_eval(const Common& c, const std::string& db, std::ostream& out) {
  auto seq = std::make_shared<const PrimarySequence>(load_sequences(c, false).front());
  auto energy = make_energy(c);
  auto s = parse_dot_bracket(seq, db, {true, c.min_hairpin});

  auto decomposition = decompose_loops(s);
  out << std::left << std::setw(12) << "loop" << std::setw(12) << "closing" << std::setw(10)
      << "branches" << std::setw(10) << "unpaired" << "energy\n";
  for (const auto& loop : decomposition.loops) {
    std::string e = "-";
    if (energy.mode() == EnergyMode::Nussinov) {
      e = format_energy(loop.closing ? -1.0 : 0.0);
    } else if (const auto* p = energy.loop_table()) {
      e = format_energy(loop_energy(loop, s, *p));
    }
    out << std::setw(12) << to_string(loop.type) << std::setw(12)
        << (loop.closing ? to_string(*loop.closing) : "-") << std::setw(10) << loop.branches.size()
        << std::setw(10) << loop.unpaired << e << "\n";
  }
  out << "total " << format_observable(observable(s, energy)) << "\n";
  return kExitOk;
}

// rules --------------------------------------------------------------------

int cmd_rules(const std::string& loop, std::ostream& out) {
  std::optional<LoopKind> only;
  if (!loop.empty()) {
    only = parse_loop_kind(loop);
    if (!only) throw ConfigError("unknown loop kind '" + loop + "'");
  }
  for (const auto& r : all_rules()) {
    if (only && r.loop_kind != *only) continue;
    out << std::left << std::setw(20) << to_string(r) << site_predicate(r) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"RNA folding with an additive graph grammar and an S[B] controller"};
  app.name("rnagg");
  app.require_subcommand(1);

  Common fold_c, enum_c, eval_c;
  FoldOpts fold_o;
  EnumerateOpts enum_o;
  std::string eval_db;
  std::string rules_loop;

  auto* fold = app.add_subcommand("fold", "Run the controller and report the folded structure");
  add_sequence_options(*fold, fold_c, true);
  add_model_options(*fold, fold_c);
  fold->add_option("--machine", fold_o.machine, "S machine (JSON); default: greedy w0");
  fold->add_option("--trace", fold_o.trace, "Write the JSON-lines trace here ('-' for stdout)");
  fold->add_option("--max-steps", fold_o.limits.max_steps, "Step limit")->check(CLI::PositiveNumber);
  fold->add_option("--adapt-depth", fold_o.limits.adaptation_max_depth,
                   "Adaptation search depth limit");
  fold->add_option("--adapt-states", fold_o.limits.adaptation_max_states,
                   "Adaptation search state limit")
      ->check(CLI::PositiveNumber);
  fold->add_option("--seed", fold_o.seed, "Reserved for randomized strategies");

  auto* enumerate = app.add_subcommand("enumerate", "Build and export the folding LTS");
  add_sequence_options(*enumerate, enum_c, false);
  add_model_options(*enumerate, enum_c);
  enumerate->add_option("--export", enum_o.format, "Export format")
      ->check(CLI::IsMember({"json", "dot"}));
  enumerate->add_option("--out", enum_o.out, "Output file ('-' for stdout)");
  enumerate->add_option("--max-states", enum_o.max_states)->check(CLI::PositiveNumber);
  enumerate->add_option("--max-depth", enum_o.max_depth)->check(CLI::PositiveNumber);
  enumerate->add_option("--time-budget", enum_o.time_budget, "Seconds")->check(CLI::PositiveNumber);
  enumerate->add_option("--energy-ceiling", enum_o.energy_ceiling,
                        "Do not expand states above this energy");

  auto* eval = app.add_subcommand("eval", "Decompose a structure into loops and score it");
  add_sequence_options(*eval, eval_c, false);
  add_model_options(*eval, eval_c);
  eval->add_option("--db,--structure", eval_db, "Dot-bracket structure")->required();

  auto* rules = app.add_subcommand("rules", "List the grammar productions");
  rules->add_option("--loop", rules_loop, "Only this loop kind");
  rules->add_flag("--list", "List every rule (the default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fold) return cmd_fold(fold_c, fold_o, out);
    if (*enumerate) return cmd_enumerate(enum_c, enum_o, out, err);
    if (*eval) return cmd_eval(eval_c, eval_db, out);
    if (*rules) return cmd_rules(rules_loop, out);
  } catch (const StructureError& e) {
    err << "error: " << e.what() << (e.what()[std::strlen(e.what()) - 1] == '\n' ? "" : "\n");
    return kExitConfig;
  } catch (const ExternalError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    if (!e.output().empty()) err << e.output() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace rnagg::cli
