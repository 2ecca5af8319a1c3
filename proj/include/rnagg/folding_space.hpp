#pragma once

// The labelled transition system of a sequence's folding space: states are
// secondary structures (identified by dot-bracket), transitions are rule
// applications. Built breadth-first from the open chain with deduplication.

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rnagg/energy.hpp"
#include "rnagg/grammar.hpp"
#include "rnagg/structure.hpp"

namespace rnagg {

struct Successor {
  Match match;
  SecondaryStructure structure;
};

/// One entry per enumerated match, in match order.
std::vector<Successor> successors(const SecondaryStructure& s, const Grammar& g);

struct ExploreLimits {
  std::size_t max_states = 2'000'000;
  std::size_t max_depth = static_cast<std::size_t>(-1);
  std::optional<std::chrono::duration<double>> time_budget;
  /// States whose finite observable exceeds the ceiling are kept but not
  /// expanded.
  std::optional<double> energy_ceiling;

  /// Throws ConfigError unless every limit is positive.
  void validate() const;
};

struct LtsState {
  StructureKey key;
  SecondaryStructure structure;
  Observable observable;
  std::size_t depth = 0;
  bool terminal = false;  // no matches at all
  bool expanded = false;  // outgoing transitions are complete
};

struct LtsTransition {
  std::size_t from = 0;
  std::size_t to = 0;
  RuleId rule;
  std::size_t matches = 1;  // parallel matches merged into this edge

  friend auto operator<=>(const LtsTransition&, const LtsTransition&) = default;
};

struct Lts {
  SequencePtr sequence;
  Grammar grammar;
  EnergyMode energy_mode = EnergyMode::Nussinov;
  std::vector<LtsState> states;
  std::vector<LtsTransition> transitions;
  std::size_t initial = 0;
  /// "max_states", "max_depth" or "time_budget" when exploration stopped early.
  std::optional<std::string> truncated_by;
  /// States left unexpanded by the energy ceiling.
  std::size_t pruned = 0;

  bool complete() const { return !truncated_by && pruned == 0; }
  std::optional<std::size_t> find(const StructureKey& key) const;
};

Lts build_lts(SequencePtr seq, const Grammar& g, const EnergyModel& em,
              const ExploreLimits& lim = {});

struct MinEnergyState {
  std::size_t index = 0;
  Observable observable;
  /// False when the LTS is truncated or pruned: the value is an upper bound.
  bool exact = true;
};

class NoFoldedStateError : public Error {
 public:
  NoFoldedStateError() : Error("no-folded-state: the folding space has no paired structure") {}
};

/// Minimal finite observable, ties broken by the smaller dot-bracket key.
MinEnergyState min_energy_state(const Lts& lts);

struct LtsStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t terminals = 0;
  std::vector<std::size_t> depth_histogram;
  std::map<RuleId, std::size_t> rule_transitions;
  /// Only meaningful across a sweep; absent for a single LTS.
  std::optional<double> fitted_base;
};

LtsStats stats(const Lts& lts);

/// One-line summary used by the CLI.
std::string format_stats_line(const LtsStats& st, const Lts& lts);

struct SweepPoint {
  std::size_t length = 0;
  std::size_t states = 0;
};

/// exp(slope) of a least-squares fit of ln(states) against length; absent
/// with fewer than two distinct lengths.
std::optional<double> fit_exponential_base(const std::vector<SweepPoint>& points);

enum class ExportFormat { Dot, Json };

std::string export_lts(const Lts& lts, ExportFormat format);

/// Schema problems in an exported JSON document; empty when valid.
std::vector<std::string> validate_lts_json(std::string_view text);

/// Rebuilds an LTS from its JSON export; throws ParseError when invalid.
Lts lts_from_json(std::string_view text);

}  // namespace rnagg
