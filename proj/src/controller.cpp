#include "rnagg/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace rnagg {

std::string describe(const Constraint& c) {
  switch (c.kind) {
    case ConstraintKind::Phi0Greedy: return "phi0";
    case ConstraintKind::True: return "true";
    case ConstraintKind::Strategy: break;
  }
  std::string out = c.strategy;
  if (!c.params.empty()) {
    out += "(";
    bool first = true;
    for (const auto& [k, v] : c.params) {
      std::ostringstream num;
      num << v;
      out += (first ? "" : ",") + k + "=" + num.str();
      first = false;
    }
    out += ")";
  }
  return out;
}

SBModel::SBModel(std::vector<SState> states, std::string initial)
    : states_(std::move(states)), initial_(std::move(initial)) {
  if (states_.empty()) throw ConfigError("S machine has no states");
  std::set<std::string> ids;
  for (const auto& s : states_) {
    if (s.id.empty()) throw ConfigError("S state with empty id");
    if (!ids.insert(s.id).second) throw ConfigError("duplicate S state '" + s.id + "'");
  }
  if (!ids.contains(initial_)) throw ConfigError("unknown initial S state '" + initial_ + "'");
  for (const auto& s : states_) {
    if (s.successors.size() > 64) {
      throw ConfigError("S state '" + s.id + "' has more than 64 successors");
    }
    for (const auto& t : s.successors) {
      if (!ids.contains(t.target)) {
        throw ConfigError("transition " + s.id + " -> " + t.target + " targets an unknown state");
      }
      if (t.psi.kind == ConstraintKind::Phi0Greedy) {
        throw ConfigError("transition " + s.id + " -> " + t.target +
                          ": psi must be \"true\" or a strategy");
      }
    }
  }
}

SBModel SBModel::greedy_default() {
  return SBModel({SState{"w0", Constraint::phi0(), {STransition{"w0", Constraint::always()}}}}, "w0");
}

const SState& SBModel::state(const std::string& id) const {
  for (const auto& s : states_) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown S state '" + id + "'");
}

void SBModel::check_strategies(const StrategyRegistry& registry) const {
  auto check = [&](const Constraint& c) {
    if (c.kind == ConstraintKind::Strategy && !registry.contains(c.strategy)) {
      throw ConfigError("unregistered strategy '" + c.strategy + "'");
    }
  };
  for (const auto& s : states_) {
    check(s.constraint);
    for (const auto& t : s.successors) check(t.psi);
  }
}

namespace {

using json = nlohmann::json;

Constraint constraint_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "phi0") return Constraint::phi0();
    if (s == "true") return Constraint::always();
    return Constraint::pluggable(s);
  }
  if (!j.is_object() || !j.contains("strategy") || !j["strategy"].is_string()) {
    throw ConfigError(where + ": constraint must be \"phi0\", \"true\" or {\"strategy\": ...}");
  }
  StrategyParams params;
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError(where + ": params must be an object");
    for (const auto& [k, v] : j["params"].items()) {
      if (!v.is_number()) throw ConfigError(where + ": param '" + k + "' is not a number");
      params[k] = v.get<double>();
    }
  }
  for (const auto& [k, v] : j.items()) {
    if (k != "strategy" && k != "params") throw ConfigError(where + ": unknown key '" + k + "'");
  }
  return Constraint::pluggable(j["strategy"].get<std::string>(), std::move(params));
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return j[key];
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) throw ConfigError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

SBModel load_sb_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("S machine: ") + e.what());
  }
  const std::string initial = string_field(doc, "initial", "S machine");
  const auto& states_j = field(doc, "states", "S machine");
  if (!states_j.is_array()) throw ConfigError("S machine: \"states\" must be an array");

  std::vector<SState> states;
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < states_j.size(); ++k) {
    const std::string where = "states[" + std::to_string(k) + "]";
    SState s;
    s.id = string_field(states_j[k], "id", where);
    s.constraint = states_j[k].contains("constraint")
                       ? constraint_from_json(states_j[k]["constraint"], where)
                       : Constraint::phi0();
    index.emplace(s.id, states.size());
    states.push_back(std::move(s));
  }

  if (doc.contains("transitions")) {
    const auto& ts = doc["transitions"];
    if (!ts.is_array()) throw ConfigError("S machine: \"transitions\" must be an array");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const std::string where = "transitions[" + std::to_string(k) + "]";
      auto from = string_field(ts[k], "from", where);
      auto to = string_field(ts[k], "to", where);
      Constraint psi = ts[k].contains("psi") ? constraint_from_json(ts[k]["psi"], where)
                                             : Constraint::always();
      auto it = index.find(from);
      if (it == index.end()) throw ConfigError(where + ": unknown source state '" + from + "'");
      states[it->second].successors.push_back({std::move(to), std::move(psi)});
    }
  }
  return SBModel(std::move(states), initial);
}

SBModel load_sb_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read S machine '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_sb_model(buf.str());
}

std::string_view to_string(Mode m) { return m == Mode::Steady ? "steady" : "adapting"; }

ConstraintCheck check_constraint(const Constraint& c, const StrategyContext& ctx,
                                 const StrategyRegistry& registry) {
  switch (c.kind) {
    case ConstraintKind::True: return {true, std::nullopt};
    case ConstraintKind::Phi0Greedy: {
      auto k = phi0_index(ctx.current_observable, ctx.successors);
      if (!k) return {false, std::nullopt};
      return {true, Move{"phi0", ctx.successors[*k], false}};
    }
    case ConstraintKind::Strategy: break;
  }
  auto move = registry.get(c.strategy).select(ctx);
  return {move.has_value(), std::move(move)};
}

std::optional<Successor> phi0_select(const SecondaryStructure& q, std::span<const Successor> succs,
                                     const EnergyModel& em) {
  std::optional<std::size_t> best;
  Observable best_obs;
  std::string best_key;
  for (std::size_t k = 0; k < succs.size(); ++k) {
    auto obs = observable(succs[k].structure, em);
    auto key = emit_dot_bracket(succs[k].structure);
    if (!best || obs < best_obs || (obs == best_obs && key < best_key)) {
      best = k;
      best_obs = obs;
      best_key = std::move(key);
    }
  }
  if (!best || best_obs > observable(q, em)) return std::nullopt;
  return succs[*best];
}

namespace {

nlohmann::ordered_json observable_json(const Observable& o) {
  if (!o.finite()) return nullptr;
  double r = std::round(o.value() * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace

std::string Trace::to_jsonl() const {
  using ojson = nlohmann::ordered_json;
  std::string out;
  for (const auto& r : records) {
    ojson line;
    line["step"] = r.step;
    line["s_state"] = r.s_state;
    line["db"] = r.db;
    line["observable"] = observable_json(r.observable);
    line["mode"] = std::string(to_string(r.mode));
    line["move"] = r.move;
    line["note"] = r.note;
    out += line.dump() + "\n";
  }
  ojson s;
  s["final_s_state"] = summary.final_s_state;
  s["final_db"] = summary.final_db;
  s["final_observable"] = observable_json(summary.final_observable);
  s["best_db"] = summary.best_db;
  s["best_observable"] = observable_json(summary.best_observable);
  s["termination"] = summary.termination;
  s["adaptations"] = summary.adaptations;
  ojson line;
  line["summary"] = std::move(s);
  out += line.dump() + "\n";
  return out;
}

SBController::SBController(SBModel sb, SequencePtr seq, const Grammar& g, EnergyModel em,
                           RunLimits lim, StrategyRegistry registry)
    : sb_(std::move(sb)),
      seq_(std::move(seq)),
      grammar_(g),
      energy_(std::move(em)),
      limits_(lim),
      registry_(std::move(registry)),
      cfg_{sb_.initial(), SecondaryStructure::empty(seq_), Observable::unfolded(), Mode::Steady, {}, {}} {
  sb_.check_strategies(registry_);
  cfg_.observable = observable(cfg_.b_state, energy_);
  visited_.insert(emit_dot_bracket(cfg_.b_state));
  best_ = {cfg_.observable, cfg_.b_state};
  best_db_ = emit_dot_bracket(cfg_.b_state);
  record(Mode::Steady, "", "initial");
}

std::set<std::string> SBController::visited_with(std::span<const std::string> extra) const {
  auto out = visited_;
  out.insert(extra.begin(), extra.end());
  return out;
}

std::vector<ScoredSuccessor> SBController::scored(const SecondaryStructure& s,
                                                  const std::set<std::string>& visited) const {
  return scored_successors(s, grammar_, energy_, visited);
}

std::optional<Move> SBController::satisfiable(const Constraint& c, const SecondaryStructure& s,
                                              Observable obs,
                                              std::span<const ScoredSuccessor> succs,
                                              const std::set<std::string>& visited) const {
  // "true" imposes nothing on the move, but a steady step still needs
  // somewhere new to go.
  if (c.kind == ConstraintKind::True) {
    if (succs.empty()) return std::nullopt;
    return Move{"true", succs.front(), false};
  }
  StrategyContext ctx{s, obs, succs, grammar_, energy_, visited, best_, c.params};
  return check_constraint(c, ctx, registry_).witness;
}

bool SBController::psi_holds(const Constraint& psi, const SecondaryStructure& s, Observable obs,
                             const std::set<std::string>& visited) const {
  if (psi.kind == ConstraintKind::True) return true;
  auto succs = scored(s, visited);
  StrategyContext ctx{s, obs, succs, grammar_, energy_, visited, best_, psi.params};
  if (psi.kind == ConstraintKind::Phi0Greedy) return phi0_index(obs, succs).has_value();
  return registry_.get(psi.strategy).holds(ctx);
}

void SBController::enter(SecondaryStructure s) {
  cfg_.b_state = std::move(s);
  cfg_.observable = observable(cfg_.b_state, energy_);
  auto db = emit_dot_bracket(cfg_.b_state);
  visited_.insert(db);
  if (cfg_.observable < best_.observable) {
    best_ = {cfg_.observable, cfg_.b_state};
    best_db_ = std::move(db);
  }
}

void SBController::record(Mode mode, std::string move, std::string note) {
  records_.push_back({records_.size(), cfg_.s_state, emit_dot_bracket(cfg_.b_state),
                      cfg_.observable, mode, std::move(move), std::move(note)});
}

StepResult SBController::steady_step() {
  const SState& w = sb_.state(cfg_.s_state);
  auto succs = scored(cfg_.b_state, visited_);
  auto move = satisfiable(w.constraint, cfg_.b_state, cfg_.observable, succs, visited_);
  if (!move) return {false, std::nullopt};

  cfg_.mode = Mode::Steady;
  enter(move->target.structure);
  std::string note;
  if (w.constraint.kind == ConstraintKind::Strategy) note = move->label;
  if (move->jump) note += note.empty() ? "jump" : ":jump";
  record(Mode::Steady, to_string(move->target.match.rule), std::move(note));
  return {true, std::move(move)};
}

AdaptationOutcome SBController::adaptation_phase() {
  const SState& w = sb_.state(cfg_.s_state);
  cfg_.mode = Mode::Adapting;
  cfg_.adapting_from = w.id;
  cfg_.candidates.clear();
  for (const auto& t : w.successors) cfg_.candidates.push_back(t.target);

  AdaptationOutcome out;
  out.reason = "adaptation-exhausted";

  struct Node {
    SecondaryStructure structure;
    std::string key;
    Observable observable;
    std::optional<std::size_t> parent;
    std::string label;
    std::uint64_t mask;  // candidates whose psi held all along the path
  };
  std::vector<Node> nodes;
  std::unordered_map<std::string, std::size_t> seen;

  auto path_keys = [&](std::size_t n) {
    std::vector<std::string> keys;
    for (std::optional<std::size_t> k = n; k; k = nodes[*k].parent) keys.push_back(nodes[*k].key);
    return keys;
  };
  auto psi_mask = [&](const SecondaryStructure& s, Observable obs,
                      const std::set<std::string>& visited, std::uint64_t allowed) {
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < w.successors.size(); ++k) {
      const std::uint64_t bit = std::uint64_t{1} << k;
      if ((allowed & bit) && psi_holds(w.successors[k].psi, s, obs, visited)) mask |= bit;
    }
    return mask;
  };

  const std::uint64_t all =
      w.successors.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << w.successors.size()) - 1;
  {
    auto key = emit_dot_bracket(cfg_.b_state);
    auto mask = psi_mask(cfg_.b_state, cfg_.observable, visited_, all);
    if (mask == 0) return out;
    seen.emplace(key, 0);
    nodes.push_back({cfg_.b_state, std::move(key), cfg_.observable, std::nullopt, "", mask});
  }

  std::vector<std::size_t> level{0};
  for (std::size_t depth = 0; !level.empty(); ++depth) {
    for (std::size_t n : level) {
      auto keys = path_keys(n);
      auto visited = visited_with(keys);
      auto succs = scored(nodes[n].structure, visited);
      for (std::size_t k = 0; k < w.successors.size(); ++k) {
        if (!(nodes[n].mask & (std::uint64_t{1} << k))) continue;
        const SState& target = sb_.state(w.successors[k].target);
        if (!satisfiable(target.constraint, nodes[n].structure, nodes[n].observable, succs, visited)) {
          continue;
        }
        out.success = true;
        out.target_state = target.id;
        out.explored = nodes.size();
        for (std::optional<std::size_t> p = n; p && nodes[*p].parent; p = nodes[*p].parent) {
          out.path.emplace_back(nodes[*p].label, nodes[*p].structure);
        }
        std::reverse(out.path.begin(), out.path.end());
        out.reason.clear();

        const std::string note = "switch:" + target.id;
        for (std::size_t s = 0; s < out.path.size(); ++s) {
          enter(out.path[s].second);
          record(Mode::Adapting, out.path[s].first, s + 1 == out.path.size() ? note : "");
        }
        if (out.path.empty()) record(Mode::Adapting, "", note);
        cfg_.s_state = target.id;
        cfg_.mode = Mode::Steady;
        cfg_.adapting_from.clear();
        cfg_.candidates.clear();
        return out;
      }
    }

    std::vector<std::size_t> next;
    const std::size_t first_next = nodes.size();
    auto expand = [&](std::size_t n, SecondaryStructure s, std::string label) {
      auto key = emit_dot_bracket(s);
      auto it = seen.find(key);
      if (it != seen.end()) {
        // Same state reached twice within this level: keep the first path,
        // but either path may carry the psi obligations.
        if (it->second >= first_next) {
          nodes[it->second].mask |= nodes[n].mask;
        }
        return true;
      }
      auto obs = observable(s, energy_);
      auto keys = path_keys(n);
      keys.push_back(key);
      auto mask = psi_mask(s, obs, visited_with(keys), nodes[n].mask);
      if (mask == 0) return true;
      if (nodes.size() >= limits_.adaptation_max_states) return false;
      seen.emplace(key, nodes.size());
      next.push_back(nodes.size());
      nodes.push_back({std::move(s), std::move(key), obs, n, std::move(label), mask});
      return true;
    };

    bool room = true;
    bool more = false;
    for (std::size_t n : level) {
      auto fwd = successors(nodes[n].structure, grammar_);
      std::vector<InverseStep> inv;
      if (grammar_.allow_inverse) inv = enumerate_inverse_steps(nodes[n].structure, grammar_);
      more = more || !fwd.empty() || !inv.empty();
      if (depth >= limits_.adaptation_max_depth) continue;
      for (auto& sc : fwd) {
        if (room) room = expand(n, std::move(sc.structure), to_string(sc.match.rule));
      }
      for (auto& st : inv) {
        if (room) room = expand(n, std::move(st.source), "inverse:" + to_string(st.match.rule));
      }
    }
    if (!room || (depth >= limits_.adaptation_max_depth && more)) {
      out.reason = "adaptation-limit";
      break;
    }
    level = std::move(next);
  }
  out.explored = nodes.size();
  return out;
}

TraceSummary SBController::summary(std::string termination) const {
  return {cfg_.s_state,        emit_dot_bracket(cfg_.b_state), cfg_.observable, best_db_,
          best_.observable,    std::move(termination),         adaptations_};
}

Trace SBController::run() {
  std::string termination;
  while (true) {
    if (records_.size() > limits_.max_steps) {
      termination = "max-steps";
      break;
    }
    if (steady_step().advanced) continue;
    ++adaptations_;
    auto outcome = adaptation_phase();
    if (!outcome.success) {
      termination = outcome.reason;
      break;
    }
  }
  return {records_, summary(std::move(termination))};
}

Trace run(const SBModel& sb, SequencePtr seq, const Grammar& g, const EnergyModel& em,
          const RunLimits& lim, const StrategyRegistry& registry) {
  return SBController(sb, std::move(seq), g, em, lim, registry).run();
}

}  // namespace rnagg
