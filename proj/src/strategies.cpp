#include "rnagg/strategies.hpp"

#include <deque>
#include <unordered_map>

#include "rnagg/folding_space.hpp"

namespace rnagg {

std::vector<ScoredSuccessor> scored_successors(const SecondaryStructure& s, const Grammar& g,
                                               const EnergyModel& em,
                                               const std::set<std::string>& visited) {
  std::vector<ScoredSuccessor> out;
  for (auto& sc : successors(s, g)) {
    auto key = key_of(sc.structure);
    if (visited.contains(key.key)) continue;
    auto obs = observable(sc.structure, em);
    out.push_back({std::move(sc.match), std::move(sc.structure), std::move(key), obs});
  }
  return out;
}

namespace {

bool better(const ScoredSuccessor& a, const ScoredSuccessor& b) {
  return a.observable < b.observable || (a.observable == b.observable && a.key < b.key);
}

std::optional<std::size_t> lowest(std::span<const ScoredSuccessor> succs) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < succs.size(); ++k) {
    if (!best || better(succs[k], succs[*best])) best = k;
  }
  return best;
}

double param(const StrategyParams& p, const std::string& name, double fallback) {
  auto it = p.find(name);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

std::optional<std::size_t> phi0_index(Observable current, std::span<const ScoredSuccessor> succs) {
  auto best = lowest(succs);
  if (!best || succs[*best].observable > current) return std::nullopt;
  return best;
}

StrategyRegistry StrategyRegistry::with_builtins() {
  StrategyRegistry r;
  r.add("lookahead", std::make_shared<LookaheadStrategy>());
  r.add("restart-best", std::make_shared<RestartBestStrategy>());
  r.add("energy-ceiling", std::make_shared<EnergyCeilingStrategy>());
  return r;
}

void StrategyRegistry::add(std::string name, std::shared_ptr<const Strategy> strategy) {
  strategies_[std::move(name)] = std::move(strategy);
}

const Strategy& StrategyRegistry::get(const std::string& name) const {
  auto it = strategies_.find(name);
  if (it == strategies_.end()) throw ConfigError("unregistered strategy '" + name + "'");
  return *it->second;
}

std::optional<Move> LookaheadStrategy::select(const StrategyContext& ctx) const {
  const auto depth = static_cast<int>(param(ctx.params, "depth", 2));
  if (ctx.successors.empty() || depth < 1) return std::nullopt;

  struct Node {
    SecondaryStructure structure;
    StructureKey key;
    Observable observable;
    std::size_t origin;  // index into ctx.successors
    int depth;
  };
  std::vector<Node> nodes;
  std::unordered_map<std::string, std::size_t> seen;
  std::deque<std::size_t> queue;
  for (std::size_t k = 0; k < ctx.successors.size(); ++k) {
    const auto& s = ctx.successors[k];
    if (seen.contains(s.key.key)) continue;
    seen.emplace(s.key.key, nodes.size());
    queue.push_back(nodes.size());
    nodes.push_back({s.structure, s.key, s.observable, k, 1});
  }
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (nodes[cur].depth >= depth) continue;
    for (auto& sc : scored_successors(nodes[cur].structure, ctx.grammar, ctx.energy, ctx.visited)) {
      if (seen.contains(sc.key.key)) continue;
      seen.emplace(sc.key.key, nodes.size());
      queue.push_back(nodes.size());
      nodes.push_back({std::move(sc.structure), std::move(sc.key), sc.observable, nodes[cur].origin,
                       nodes[cur].depth + 1});
    }
  }

  const Node* best = nullptr;
  for (const auto& n : nodes) {
    if (!best || n.observable < best->observable ||
        (n.observable == best->observable && n.key < best->key)) {
      best = &n;
    }
  }
  if (!best || !(best->observable < ctx.current_observable)) return std::nullopt;
  return Move{"lookahead", ctx.successors[best->origin], false};
}

std::optional<Move> RestartBestStrategy::select(const StrategyContext& ctx) const {
  if (!ctx.best.structure) return std::nullopt;
  const auto& from = *ctx.best.structure;
  const bool here = from == ctx.current;
  auto succs = here ? std::vector<ScoredSuccessor>(ctx.successors.begin(), ctx.successors.end())
                    : scored_successors(from, ctx.grammar, ctx.energy, ctx.visited);
  auto k = lowest(succs);
  if (!k) return std::nullopt;
  return Move{"restart-best", std::move(succs[*k]), !here};
}

std::optional<Move> EnergyCeilingStrategy::select(const StrategyContext& ctx) const {
  const double max = param(ctx.params, "max", 0.0);
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < ctx.successors.size(); ++k) {
    const auto& s = ctx.successors[k];
    if (s.observable.value() > max) continue;
    if (!best || better(s, ctx.successors[*best])) best = k;
  }
  if (!best) return std::nullopt;
  return Move{"energy-ceiling", ctx.successors[*best], false};
}

bool EnergyCeilingStrategy::holds(const StrategyContext& ctx) const {
  return ctx.current_observable.value() <= param(ctx.params, "max", 0.0);
}

}  // namespace rnagg
