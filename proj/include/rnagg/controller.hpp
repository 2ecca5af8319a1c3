#pragma once

// S[B] controller. The behavioural level B is the folding LTS, explored on
// the fly; the structural level S is a small automaton whose states carry
// invariants (the greedy phi0 formula, "true", or a registered strategy)
// and whose transitions carry safety conditions (psi) that must hold on
// every B state visited while adapting from one S state to another.
//
// Steady mode: while C(w) can be satisfied at the current structure q,
// move to the selected successor. Otherwise adapt: breadth-first search
// over B (forward moves, plus reverse moves when the grammar allows them)
// restricted to states where psi(w, w') holds, and stop at the first state
// where C(w') is satisfiable for some S-successor w'. A run never takes a
// steady step into a structure it has already visited, which keeps runs on
// energy plateaus finite.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnagg/energy.hpp"
#include "rnagg/folding_space.hpp"
#include "rnagg/grammar.hpp"
#include "rnagg/strategies.hpp"

namespace rnagg {

enum class ConstraintKind { Phi0Greedy, True, Strategy };

struct Constraint {
  ConstraintKind kind = ConstraintKind::Phi0Greedy;
  std::string strategy;
  StrategyParams params;

  static Constraint phi0() { return {}; }
  static Constraint always() { return {ConstraintKind::True, {}, {}}; }
  static Constraint pluggable(std::string name, StrategyParams params = {}) {
    return {ConstraintKind::Strategy, std::move(name), std::move(params)};
  }
};

std::string describe(const Constraint& c);

struct STransition {
  std::string target;
  Constraint psi = Constraint::always();
};

struct SState {
  std::string id;
  Constraint constraint;
  std::vector<STransition> successors;
};

class SBModel {
 public:
  /// Throws ConfigError on duplicate ids, dangling transition targets, an
  /// unknown initial state, a phi0 psi, or more than 64 successors.
  SBModel(std::vector<SState> states, std::string initial);

  /// w0 with phi0 and a self-loop whose psi is "true".
  static SBModel greedy_default();

  const SState& state(const std::string& id) const;
  const std::string& initial() const { return initial_; }
  std::span<const SState> states() const { return states_; }

  /// Throws ConfigError if a constraint names an unregistered strategy.
  void check_strategies(const StrategyRegistry& registry) const;

 private:
  std::vector<SState> states_;
  std::string initial_;
};

/// JSON: {"initial": id, "states": [{"id", "constraint"}], "transitions":
/// [{"from", "to", "psi"}]}; a constraint is "phi0", "true", or
/// {"strategy": name, "params": {key: number}}.
SBModel load_sb_model(std::string_view json_text);
SBModel load_sb_model_file(const std::filesystem::path& path);

enum class Mode { Steady, Adapting };

std::string_view to_string(Mode m);

struct SBConfiguration {
  std::string s_state;
  SecondaryStructure b_state;
  Observable observable;
  Mode mode = Mode::Steady;
  std::string adapting_from;            // Adapting only
  std::vector<std::string> candidates;  // Adapting only: admissible targets w'
};

struct ConstraintCheck {
  bool satisfied = false;
  std::optional<Move> witness;
};

/// True -> (true, none); phi0 -> satisfied iff a greedy successor exists,
/// witnessed by it; a strategy -> its selection. Throws ConfigError for an
/// unregistered strategy.
ConstraintCheck check_constraint(const Constraint& c, const StrategyContext& ctx,
                                 const StrategyRegistry& registry);

/// Greedy selection over plain successors: minimal observable, provided it
/// does not exceed observable(q); ties to the smaller dot-bracket.
std::optional<Successor> phi0_select(const SecondaryStructure& q, std::span<const Successor> succs,
                                     const EnergyModel& em);

struct RunLimits {
  std::size_t max_steps = 100'000;
  std::size_t adaptation_max_depth = 64;
  std::size_t adaptation_max_states = 200'000;
};

struct TraceRecord {
  std::size_t step = 0;
  std::string s_state;
  std::string db;
  Observable observable;
  Mode mode = Mode::Steady;
  std::string move;  // rule id, "inverse:<rule id>", strategy label, or empty
  std::string note;
};

struct TraceSummary {
  std::string final_s_state;
  std::string final_db;
  Observable final_observable;
  std::string best_db;
  Observable best_observable;
  std::string termination;
  std::size_t adaptations = 0;
};

struct Trace {
  std::vector<TraceRecord> records;
  TraceSummary summary;

  /// One JSON object per record, then {"summary": {...}}.
  std::string to_jsonl() const;
};

struct StepResult {
  bool advanced = false;  // false: adaptation needed
  std::optional<Move> move;
};

struct AdaptationOutcome {
  bool success = false;
  std::string target_state;
  /// Each B step of the path from the starting structure, in order.
  std::vector<std::pair<std::string, SecondaryStructure>> path;
  std::size_t explored = 0;
  std::string reason;  // on failure: "adaptation-exhausted" or "adaptation-limit"
};

class SBController {
 public:
  SBController(SBModel sb, SequencePtr seq, const Grammar& g, EnergyModel em, RunLimits lim = {},
               StrategyRegistry registry = StrategyRegistry::with_builtins());

  const SBConfiguration& configuration() const { return cfg_; }
  const std::vector<TraceRecord>& records() const { return records_; }

  /// Evaluates C(w) at the current structure; on success moves there and
  /// appends a steady record.
  StepResult steady_step();

  /// Searches for w'[q'] and, on success, records the B steps taken and
  /// switches to Steady in w'.
  AdaptationOutcome adaptation_phase();

  /// Alternates steady steps and adaptation until termination.
  Trace run();

 private:
  std::set<std::string> visited_with(std::span<const std::string> extra) const;
  std::vector<ScoredSuccessor> scored(const SecondaryStructure& s,
                                      const std::set<std::string>& visited) const;
  /// The move C(w) would take, if any.
  std::optional<Move> satisfiable(const Constraint& c, const SecondaryStructure& s, Observable obs,
                                  std::span<const ScoredSuccessor> succs,
                                  const std::set<std::string>& visited) const;
  bool psi_holds(const Constraint& psi, const SecondaryStructure& s, Observable obs,
                 const std::set<std::string>& visited) const;
  void enter(SecondaryStructure s);
  void record(Mode mode, std::string move, std::string note);
  TraceSummary summary(std::string termination) const;

  SBModel sb_;
  SequencePtr seq_;
  Grammar grammar_;
  EnergyModel energy_;
  RunLimits limits_;
  StrategyRegistry registry_;

  SBConfiguration cfg_;
  std::set<std::string> visited_;
  BestSeen best_;
  std::string best_db_;
  std::vector<TraceRecord> records_;
  std::size_t adaptations_ = 0;
};

Trace run(const SBModel& sb, SequencePtr seq, const Grammar& g, const EnergyModel& em,
          const RunLimits& lim = {},
          const StrategyRegistry& registry = StrategyRegistry::with_builtins());

}  // namespace rnagg
