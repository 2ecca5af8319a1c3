#include "rnagg/folding_space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "json.hpp"

#include "rnagg/format.hpp"

namespace rnagg {

std::vector<Successor> successors(const SecondaryStructure& s, const Grammar& g) {
  std::vector<Successor> out;
  for (auto& m : enumerate_matches(s, g)) {
    auto h = apply_match(s, m, g);
    out.push_back({std::move(m), std::move(h)});
  }
  return out;
}

void ExploreLimits::validate() const {
  if (max_states == 0) throw ConfigError("max_states must be positive");
  if (max_depth == 0) throw ConfigError("max_depth must be positive");
  if (time_budget && time_budget->count() <= 0) throw ConfigError("time budget must be positive");
}

std::optional<std::size_t> Lts::find(const StructureKey& key) const {
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].key == key) return k;
  }
  return std::nullopt;
}

Lts build_lts(SequencePtr seq, const Grammar& g, const EnergyModel& em, const ExploreLimits& lim) {
  lim.validate();
  const auto start = std::chrono::steady_clock::now();

  Lts lts;
  lts.sequence = seq;
  lts.grammar = g;
  lts.energy_mode = em.mode();

  std::unordered_map<std::string, std::size_t> index;
  auto add_state = [&](SecondaryStructure s, std::size_t depth) {
    auto key = key_of(s);
    auto obs = observable(s, em);
    index.emplace(key.key, lts.states.size());
    lts.states.push_back({std::move(key), std::move(s), obs, depth, false, false});
    return lts.states.size() - 1;
  };
  lts.initial = add_state(SecondaryStructure::empty(seq), 0);

  std::deque<std::size_t> frontier{lts.initial};
  while (!frontier.empty()) {
    const std::size_t cur = frontier.front();
    frontier.pop_front();

    if (lim.time_budget && std::chrono::steady_clock::now() - start > *lim.time_budget) {
      lts.truncated_by = "time_budget";
      break;
    }

    auto succ = successors(lts.states[cur].structure, g);
    if (succ.empty()) {
      lts.states[cur].terminal = true;
      lts.states[cur].expanded = true;
      continue;
    }
    if (lim.energy_ceiling && lts.states[cur].observable.finite() &&
        lts.states[cur].observable.value() > *lim.energy_ceiling) {
      ++lts.pruned;
      continue;
    }
    if (lts.states[cur].depth >= lim.max_depth) {
      lts.truncated_by = "max_depth";
      continue;
    }

    std::vector<std::string> fresh;
    for (const auto& sc : succ) {
      auto key = emit_dot_bracket(sc.structure);
      if (!index.contains(key) && std::find(fresh.begin(), fresh.end(), key) == fresh.end()) {
        fresh.push_back(std::move(key));
      }
    }
    if (lts.states.size() + fresh.size() > lim.max_states) {
      lts.truncated_by = "max_states";
      break;
    }

    std::map<std::pair<std::size_t, RuleId>, std::size_t> edges;
    const std::size_t depth = lts.states[cur].depth + 1;
    for (auto& sc : succ) {
      auto key = emit_dot_bracket(sc.structure);
      auto it = index.find(key);
      std::size_t to = 0;
      if (it == index.end()) {
        to = add_state(std::move(sc.structure), depth);
        frontier.push_back(to);
      } else {
        to = it->second;
      }
      ++edges[{to, sc.match.rule}];
    }
    for (const auto& [edge, count] : edges) {
      lts.transitions.push_back({cur, edge.first, edge.second, count});
    }
    lts.states[cur].expanded = true;
  }
  return lts;
}

MinEnergyState min_energy_state(const Lts& lts) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < lts.states.size(); ++k) {
    const auto& st = lts.states[k];
    if (!st.observable.finite()) continue;
    if (!best) {
      best = k;
      continue;
    }
    const auto& b = lts.states[*best];
    if (st.observable < b.observable || (st.observable == b.observable && st.key < b.key)) best = k;
  }
  if (!best) throw NoFoldedStateError();
  return {*best, lts.states[*best].observable, lts.complete()};
}

LtsStats stats(const Lts& lts) {
  LtsStats st;
  st.states = lts.states.size();
  st.transitions = lts.transitions.size();
  for (const auto& s : lts.states) {
    if (s.terminal) ++st.terminals;
    if (st.depth_histogram.size() <= s.depth) st.depth_histogram.resize(s.depth + 1, 0);
    ++st.depth_histogram[s.depth];
  }
  for (const auto& t : lts.transitions) ++st.rule_transitions[t.rule];
  return st;
}

std::string format_stats_line(const LtsStats& st, const Lts& lts) {
  std::ostringstream out;
  out << "states=" << st.states << " transitions=" << st.transitions
      << " terminals=" << st.terminals << " depth=";
  for (std::size_t d = 0; d < st.depth_histogram.size(); ++d) {
    out << (d ? "," : "") << st.depth_histogram[d];
  }
  out << " truncated_by=" << lts.truncated_by.value_or("none");
  if (lts.pruned) out << " pruned=" << lts.pruned;
  return out.str();
}

std::optional<double> fit_exponential_base(const std::vector<SweepPoint>& points) {
  std::vector<SweepPoint> usable;
  for (const auto& p : points) {
    if (p.states > 0) usable.push_back(p);
  }
  if (usable.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (const auto& p : usable) {
    mx += static_cast<double>(p.length);
    my += std::log(static_cast<double>(p.states));
  }
  mx /= static_cast<double>(usable.size());
  my /= static_cast<double>(usable.size());
  double sxx = 0, sxy = 0;
  for (const auto& p : usable) {
    double dx = static_cast<double>(p.length) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(static_cast<double>(p.states)) - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return std::exp(sxy / sxx);
}

namespace {

using ojson = nlohmann::ordered_json;

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string export_dot(const Lts& lts) {
  std::ostringstream out;
  out << "digraph lts {\n";
  out << "  label=\"" << dot_escape(lts.sequence->str()) << "\";\n";
  out << "  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t k = 0; k < lts.states.size(); ++k) {
    const auto& s = lts.states[k];
    out << "  s" << k << " [label=\"" << dot_escape(s.key.key) << "\\n"
        << format_observable(s.observable) << "\"";
    if (k == lts.initial) out << ", penwidth=2";
    if (s.terminal) out << ", style=rounded";
    out << "];\n";
  }
  for (const auto& t : lts.transitions) {
    out << "  s" << t.from << " -> s" << t.to << " [label=\"" << to_string(t.rule) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

ojson energy_json(const Observable& o) {
  if (!o.finite()) return nullptr;
  double r = std::round(o.value() * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;
}

std::string export_json(const Lts& lts) {
  ojson doc;
  doc["sequence"] = lts.sequence->str();
  doc["grammar"] = {{"min_hairpin", lts.grammar.min_hairpin_unpaired},
                    {"allow_inverse", lts.grammar.allow_inverse}};
  doc["energy_mode"] = std::string(to_string(lts.energy_mode));
  ojson states = ojson::array();
  for (std::size_t k = 0; k < lts.states.size(); ++k) {
    const auto& s = lts.states[k];
    states.push_back({{"id", k},
                      {"db", s.key.key},
                      {"energy", energy_json(s.observable)},
                      {"depth", s.depth},
                      {"terminal", s.terminal},
                      {"expanded", s.expanded}});
  }
  doc["states"] = std::move(states);
  ojson transitions = ojson::array();
  for (const auto& t : lts.transitions) {
    transitions.push_back(
        {{"from", t.from}, {"to", t.to}, {"rule", to_string(t.rule)}, {"matches", t.matches}});
  }
  doc["transitions"] = std::move(transitions);
  doc["initial"] = lts.initial;
  doc["truncated_by"] = lts.truncated_by ? ojson(*lts.truncated_by) : ojson(nullptr);
  doc["pruned"] = lts.pruned;
  return doc.dump(1) + "\n";
}

}  // namespace

std::string export_lts(const Lts& lts, ExportFormat format) {
  return format == ExportFormat::Dot ? export_dot(lts) : export_json(lts);
}

std::vector<std::string> validate_lts_json(std::string_view text) {
  std::vector<std::string> errors;
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    errors.push_back(std::string("not JSON: ") + e.what());
    return errors;
  }
  auto need = [&](const ojson& obj, const char* key, auto pred, const char* what,
                  const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || !pred(obj[key])) {
      errors.push_back(where + "." + key + " must be " + what);
      return false;
    }
    return true;
  };
  auto is_string = [](const ojson& j) { return j.is_string(); };
  auto is_uint = [](const ojson& j) { return j.is_number_unsigned(); };
  auto is_bool = [](const ojson& j) { return j.is_boolean(); };
  auto is_array = [](const ojson& j) { return j.is_array(); };
  auto is_object = [](const ojson& j) { return j.is_object(); };
  auto is_energy = [](const ojson& j) { return j.is_null() || j.is_number(); };
  auto is_trunc = [](const ojson& j) { return j.is_null() || j.is_string(); };

  if (!doc.is_object()) {
    errors.push_back("document must be an object");
    return errors;
  }
  std::size_t n = 0;
  if (need(doc, "sequence", is_string, "a string", "$")) {
    n = doc["sequence"].get<std::string>().size();
    try {
      parse_sequence(doc["sequence"].get<std::string>());
    } catch (const ParseError& e) {
      errors.push_back(std::string("$.sequence: ") + e.what());
    }
  }
  if (need(doc, "grammar", is_object, "an object", "$")) {
    need(doc["grammar"], "min_hairpin", is_uint, "a non-negative integer", "$.grammar");
    need(doc["grammar"], "allow_inverse", is_bool, "a boolean", "$.grammar");
  }
  if (need(doc, "energy_mode", is_string, "a string", "$")) {
    auto m = doc["energy_mode"].get<std::string>();
    if (m != "nussinov" && m != "loop-table" && m != "external") {
      errors.push_back("$.energy_mode: unknown mode '" + m + "'");
    }
  }
  std::size_t state_count = 0;
  if (need(doc, "states", is_array, "an array", "$")) {
    state_count = doc["states"].size();
    for (std::size_t k = 0; k < state_count; ++k) {
      const auto& s = doc["states"][k];
      std::string where = "$.states[" + std::to_string(k) + "]";
      if (need(s, "id", is_uint, "an unsigned integer", where) && s["id"].get<std::size_t>() != k) {
        errors.push_back(where + ".id must equal its index");
      }
      if (need(s, "db", is_string, "a string", where) && s["db"].get<std::string>().size() != n) {
        errors.push_back(where + ".db length differs from the sequence");
      }
      need(s, "energy", is_energy, "a number or null", where);
      need(s, "depth", is_uint, "an unsigned integer", where);
      need(s, "terminal", is_bool, "a boolean", where);
      need(s, "expanded", is_bool, "a boolean", where);
    }
  }
  if (need(doc, "transitions", is_array, "an array", "$")) {
    for (std::size_t k = 0; k < doc["transitions"].size(); ++k) {
      const auto& t = doc["transitions"][k];
      std::string where = "$.transitions[" + std::to_string(k) + "]";
      for (const char* key : {"from", "to"}) {
        if (need(t, key, is_uint, "an unsigned integer", where) &&
            t[key].get<std::size_t>() >= state_count) {
          errors.push_back(where + "." + key + " out of range");
        }
      }
      if (need(t, "rule", is_string, "a string", where) &&
          !parse_rule_id(t["rule"].get<std::string>())) {
        errors.push_back(where + ".rule unknown");
      }
      need(t, "matches", is_uint, "an unsigned integer", where);
    }
  }
  if (need(doc, "initial", is_uint, "an unsigned integer", "$") &&
      doc["initial"].get<std::size_t>() >= std::max<std::size_t>(state_count, 1)) {
    errors.push_back("$.initial out of range");
  }
  need(doc, "truncated_by", is_trunc, "a string or null", "$");
  need(doc, "pruned", is_uint, "an unsigned integer", "$");
  return errors;
}

Lts lts_from_json(std::string_view text) {
  auto errors = validate_lts_json(text);
  if (!errors.empty()) {
    std::string msg = "invalid LTS document:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ParseError(msg);
  }
  auto doc = ojson::parse(text);
  Lts lts;
  lts.sequence = std::make_shared<const PrimarySequence>(parse_sequence(doc["sequence"].get<std::string>()));
  lts.grammar.min_hairpin_unpaired = doc["grammar"]["min_hairpin"].get<int>();
  lts.grammar.allow_inverse = doc["grammar"]["allow_inverse"].get<bool>();
  auto mode = doc["energy_mode"].get<std::string>();
  lts.energy_mode = mode == "nussinov"     ? EnergyMode::Nussinov
                    : mode == "loop-table" ? EnergyMode::LoopTable
                                           : EnergyMode::External;
  DotBracketOptions opts{true, lts.grammar.min_hairpin_unpaired};
  for (const auto& s : doc["states"]) {
    auto structure = parse_dot_bracket(lts.sequence, s["db"].get<std::string>(), opts);
    Observable obs = s["energy"].is_null() ? Observable::unfolded()
                                           : Observable(s["energy"].get<double>());
    lts.states.push_back({key_of(structure), std::move(structure), obs,
                          s["depth"].get<std::size_t>(), s["terminal"].get<bool>(),
                          s["expanded"].get<bool>()});
  }
  for (const auto& t : doc["transitions"]) {
    lts.transitions.push_back({t["from"].get<std::size_t>(), t["to"].get<std::size_t>(),
                               *parse_rule_id(t["rule"].get<std::string>()),
                               t["matches"].get<std::size_t>()});
  }
  lts.initial = doc["initial"].get<std::size_t>();
  if (!doc["truncated_by"].is_null()) lts.truncated_by = doc["truncated_by"].get<std::string>();
  lts.pruned = doc["pruned"].get<std::size_t>();
  return lts;
}

}  // namespace rnagg
