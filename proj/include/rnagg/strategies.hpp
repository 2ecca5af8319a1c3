#pragma once

// Pluggable constraints for the structural level. A strategy acts in two
// roles: as the invariant of an S state it selects the next B move (or
// reports that none satisfies it); as the safety condition of an S
// transition it is only asked whether the current B state is acceptable.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rnagg/energy.hpp"
#include "rnagg/grammar.hpp"

namespace rnagg {

using StrategyParams = std::map<std::string, double>;

/// A forward successor annotated with its observable.
struct ScoredSuccessor {
  Match match;
  SecondaryStructure structure;
  StructureKey key;
  Observable observable;
};

/// A proposed move to a structure not yet visited in the run. `jump` marks
/// moves whose target is not a forward successor of the current structure.
struct Move {
  std::string label;
  ScoredSuccessor target;
  bool jump = false;
};

struct BestSeen {
  Observable observable;
  std::optional<SecondaryStructure> structure;
};

struct StrategyContext {
  const SecondaryStructure& current;
  Observable current_observable;
  /// Unvisited forward successors, in match order.
  std::span<const ScoredSuccessor> successors;
  const Grammar& grammar;
  const EnergyModel& energy;
  const std::set<std::string>& visited;
  const BestSeen& best;
  const StrategyParams& params;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::optional<Move> select(const StrategyContext& ctx) const = 0;
  virtual bool holds(const StrategyContext& ctx) const { return select(ctx).has_value(); }
};

class StrategyRegistry {
 public:
  /// "lookahead", "restart-best" and "energy-ceiling".
  static StrategyRegistry with_builtins();

  void add(std::string name, std::shared_ptr<const Strategy> strategy);
  /// Throws ConfigError for an unregistered name.
  const Strategy& get(const std::string& name) const;
  bool contains(const std::string& name) const { return strategies_.contains(name); }

 private:
  std::map<std::string, std::shared_ptr<const Strategy>> strategies_;
};

/// Unvisited forward successors of s, scored.
std::vector<ScoredSuccessor> scored_successors(const SecondaryStructure& s, const Grammar& g,
                                               const EnergyModel& em,
                                               const std::set<std::string>& visited);

/// The greedy invariant: the successor with minimal observable provided
/// that minimum does not exceed `current`. Ties go to the smaller key, then
/// to match order.
std::optional<std::size_t> phi0_index(Observable current, std::span<const ScoredSuccessor> succs);

/// Looks `depth` (default 2) forward steps ahead over unvisited states and
/// heads for the lowest observable found if it strictly improves on the
/// current one.
class LookaheadStrategy : public Strategy {
 public:
  std::optional<Move> select(const StrategyContext& ctx) const override;
};

/// Jumps back to the best structure seen so far and continues along its
/// lowest unvisited branch.
class RestartBestStrategy : public Strategy {
 public:
  std::optional<Move> select(const StrategyContext& ctx) const override;
};

/// Holds while the observable stays at or below params["max"]; as a state
/// invariant it takes the lowest successor within the ceiling.
class EnergyCeilingStrategy : public Strategy {
 public:
  std::optional<Move> select(const StrategyContext& ctx) const override;
  bool holds(const StrategyContext& ctx) const override;
};

}  // namespace rnagg
