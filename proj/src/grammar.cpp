#include "rnagg/grammar.hpp"

#include <algorithm>
#include <cctype>

namespace rnagg {

std::string_view to_string(LoopKind k) {
  switch (k) {
    case LoopKind::Hairpin: return "Hairpin";
    case LoopKind::BulgeR: return "BulgeR";
    case LoopKind::BulgeL: return "BulgeL";
    case LoopKind::Helix: return "Helix";
    case LoopKind::InternalLoop: return "InternalLoop";
    case LoopKind::MultiBranch: return "MultiBranch";
  }
  return "?";
}

namespace {

std::string normalize_name(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::optional<LoopKind> parse_loop_kind(std::string_view s) {
  auto n = normalize_name(s);
  if (n == "hairpin") return LoopKind::Hairpin;
  if (n == "bulger") return LoopKind::BulgeR;
  if (n == "bulgel") return LoopKind::BulgeL;
  if (n == "helix") return LoopKind::Helix;
  if (n == "internalloop" || n == "internal") return LoopKind::InternalLoop;
  if (n == "multibranch" || n == "multibranchedloop" || n == "multi") return LoopKind::MultiBranch;
  return std::nullopt;
}

std::string to_string(RuleId r) {
  return std::string(to_string(r.loop_kind)) +
         (r.variant == Variant::Rule1 ? "-Rule1" : "-Rule2");
}

std::optional<RuleId> parse_rule_id(std::string_view s) {
  for (const auto& r : all_rules()) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

const std::array<RuleId, 11>& all_rules() {
  static const std::array<RuleId, 11> rules = {{
      {LoopKind::Hairpin, Variant::Rule1},
      {LoopKind::BulgeR, Variant::Rule1},
      {LoopKind::BulgeR, Variant::Rule2},
      {LoopKind::BulgeL, Variant::Rule1},
      {LoopKind::BulgeL, Variant::Rule2},
      {LoopKind::Helix, Variant::Rule1},
      {LoopKind::Helix, Variant::Rule2},
      {LoopKind::InternalLoop, Variant::Rule1},
      {LoopKind::InternalLoop, Variant::Rule2},
      {LoopKind::MultiBranch, Variant::Rule1},
      {LoopKind::MultiBranch, Variant::Rule2},
  }};
  return rules;
}

std::string_view site_predicate(RuleId r) {
  using L = LoopKind;
  const bool one = r.variant == Variant::Rule1;
  switch (r.loop_kind) {
    case L::Hairpin:
      return "add (i,j); i+1..j-1 unpaired; j-i-1 >= min_hairpin";
    case L::Helix:
      return one ? "add (i,j),(i+1,j-1); i+1 < j-1"
                 : "existing (p,q); add (p+1,q-1) or (p-1,q+1)";
    case L::BulgeR:
      return one ? "add (i,j),(i+1,j'); j' < j-1; j'+1..j-1 unpaired"
                 : "one of (i,j),(i+1,j') exists, add the other; j' < j-1; j'+1..j-1 unpaired";
    case L::BulgeL:
      return one ? "add (i,j),(i',j-1); i' > i+1; i+1..i'-1 unpaired"
                 : "one of (i,j),(i',j-1) exists, add the other; i' > i+1; i+1..i'-1 unpaired";
    case L::InternalLoop:
      return one ? "add (i,j),(i',j'); i' >= i+2; j' <= j-2; i+1..i'-1 and j'+1..j-1 unpaired"
                 : "one of (i,j),(i',j') exists, add the other; i' >= i+2; j' <= j-2; "
                   "i+1..i'-1 and j'+1..j-1 unpaired";
    case L::MultiBranch:
      return one ? "add (i,j) closing exactly 2 existing direct branches; separators >= 0 unpaired"
                 : "add (i,j) closing >= 3 existing direct branches; separators >= 0 unpaired";
  }
  return "";
}

std::string to_string(const Match& m) {
  std::string out = to_string(m.rule) + " +{";
  for (std::size_t k = 0; k < m.added.size(); ++k) {
    if (k) out += ",";
    out += to_string(m.added[k]);
  }
  out += "}";
  if (!m.context.empty()) {
    out += " @{";
    for (std::size_t k = 0; k < m.context.size(); ++k) {
      if (k) out += ",";
      out += to_string(m.context[k]);
    }
    out += "}";
  }
  return out;
}

namespace {

bool unpaired_range(const std::vector<int>& pt, int from, int to) {
  for (int k = from; k <= to; ++k) {
    if (pt[k] >= 0) return false;
  }
  return true;
}

/// Geometry shared by the stacking, bulge and interior-loop productions:
/// `inner` sits directly inside `outer` with the rule's gap pattern.
bool two_pair_site(LoopKind kind, const BasePair& outer, const BasePair& inner,
                   const std::vector<int>& pt) {
  if (!encloses(outer, inner)) return false;
  const int left = inner.i - outer.i - 1;
  const int right = outer.j - inner.j - 1;
  switch (kind) {
    case LoopKind::Helix:
      return left == 0 && right == 0;
    case LoopKind::BulgeR:
      return left == 0 && right >= 1 && unpaired_range(pt, inner.j + 1, outer.j - 1);
    case LoopKind::BulgeL:
      return right == 0 && left >= 1 && unpaired_range(pt, outer.i + 1, inner.i - 1);
    case LoopKind::InternalLoop:
      return left >= 1 && right >= 1 && unpaired_range(pt, outer.i + 1, inner.i - 1) &&
             unpaired_range(pt, inner.j + 1, outer.j - 1);
    default:
      return false;
  }
}

/// Pairs of s directly inside (i,j), or nullopt if some pair of s crosses it.
std::optional<std::vector<BasePair>> direct_branches(const std::vector<int>& pt, int i, int j) {
  std::vector<BasePair> out;
  int k = i + 1;
  while (k < j) {
    int l = pt[k];
    if (l < 0) {
      ++k;
      continue;
    }
    if (l < k || l > j) return std::nullopt;
    out.push_back({k, l});
    k = l + 1;
  }
  return out;
}

/// Innermost pair of s strictly enclosing p, if any.
std::optional<BasePair> enclosing_pair(const SecondaryStructure& s, const BasePair& p) {
  std::optional<BasePair> best;
  for (const auto& q : s.pairs()) {
    if (encloses(q, p) && (!best || encloses(*best, q))) best = q;
  }
  return best;
}

std::optional<SecondaryStructure> try_add(const SecondaryStructure& s,
                                          std::span<const BasePair> added, int min_hairpin) {
  std::vector<BasePair> pairs(s.pairs().begin(), s.pairs().end());
  pairs.insert(pairs.end(), added.begin(), added.end());
  auto out = SecondaryStructure::unchecked(s.sequence_ptr(), std::move(pairs));
  if (out.pair_count() != s.pair_count() + added.size()) return std::nullopt;
  if (!validate_structure(out, min_hairpin).ok()) return std::nullopt;
  return out;
}

bool shape_ok(const Match& m) {
  const auto& r = m.rule;
  if (r.loop_kind == LoopKind::Hairpin) {
    return r.variant == Variant::Rule1 && m.added.size() == 1 && m.context.empty();
  }
  if (r.loop_kind == LoopKind::MultiBranch) {
    std::size_t need = r.variant == Variant::Rule1 ? 2 : 3;
    bool count_ok = r.variant == Variant::Rule1 ? m.context.size() == need : m.context.size() >= need;
    return m.added.size() == 1 && count_ok;
  }
  if (r.variant == Variant::Rule1) return m.added.size() == 2 && m.context.empty();
  return m.added.size() == 1 && m.context.size() == 1;
}

bool site_ok(const SecondaryStructure& s, const Match& m, const std::vector<int>& pt, int min_hairpin) {
  const auto& r = m.rule;
  switch (r.loop_kind) {
    case LoopKind::Hairpin: {
      const auto& p = m.added[0];
      return p.j - p.i - 1 >= min_hairpin && unpaired_range(pt, p.i + 1, p.j - 1);
    }
    case LoopKind::MultiBranch: {
      const auto& p = m.added[0];
      auto branches = direct_branches(pt, p.i, p.j);
      return branches && *branches == m.context;
    }
    default:
      break;
  }
  if (r.variant == Variant::Rule1) {
    return two_pair_site(r.loop_kind, m.added[0], m.added[1], pt);
  }
  const auto& a = m.added[0];
  const auto& c = m.context[0];
  if (!s.has_pair(c)) return false;
  if (encloses(c, a)) return two_pair_site(r.loop_kind, c, a, pt);
  if (encloses(a, c)) return two_pair_site(r.loop_kind, a, c, pt);
  return false;
}

/// Shape, context, endpoint, and site checks; returns the derived structure
/// on success.
std::optional<SecondaryStructure> glue(const SecondaryStructure& s, const Match& m,
                                       const Grammar& g, const std::vector<int>& pt) {
  if (!shape_ok(m)) return std::nullopt;
  if (!std::is_sorted(m.added.begin(), m.added.end()) ||
      !std::is_sorted(m.context.begin(), m.context.end())) {
    return std::nullopt;
  }
  const int n = static_cast<int>(s.size());
  for (const auto& p : m.added) {
    if (p.i < 0 || p.j >= n || p.i >= p.j) return std::nullopt;
    if (!is_admissible_pair(s.sequence()[p.i], s.sequence()[p.j])) return std::nullopt;
    if (pt[p.i] >= 0 || pt[p.j] >= 0) return std::nullopt;
  }
  for (const auto& c : m.context) {
    if (!s.has_pair(c)) return std::nullopt;
  }
  if (!site_ok(s, m, pt, g.min_hairpin_unpaired)) return std::nullopt;
  return try_add(s, m.added, g.min_hairpin_unpaired);
}

/// Candidate matches (rule + context) that add exactly `added` to s.
void single_pair_candidates(const SecondaryStructure& s, const std::vector<int>& pt,
                            const BasePair& a, std::vector<Match>& out) {
  out.push_back({{LoopKind::Hairpin, Variant::Rule1}, {a}, {}});

  std::vector<BasePair> partners;
  if (auto enc = enclosing_pair(s, a)) partners.push_back(*enc);
  auto branches = direct_branches(pt, a.i, a.j);
  if (!branches) return;
  if (branches->size() == 1) partners.push_back(branches->front());
  for (const auto& c : partners) {
    for (auto kind : {LoopKind::BulgeR, LoopKind::BulgeL, LoopKind::Helix, LoopKind::InternalLoop}) {
      out.push_back({{kind, Variant::Rule2}, {a}, {c}});
    }
  }
  if (branches->size() >= 2) {
    auto v = branches->size() == 2 ? Variant::Rule1 : Variant::Rule2;
    out.push_back({{LoopKind::MultiBranch, v}, {a}, *branches});
  }
}

LoopKind two_pair_kind(const BasePair& outer, const BasePair& inner) {
  const bool left = inner.i > outer.i + 1;
  const bool right = inner.j < outer.j - 1;
  if (!left && !right) return LoopKind::Helix;
  if (!left) return LoopKind::BulgeR;
  if (!right) return LoopKind::BulgeL;
  return LoopKind::InternalLoop;
}

void sort_unique(std::vector<Match>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

bool gluing_check(const SecondaryStructure& s, const Match& m, const Grammar& g) {
  for (const auto& p : s.pairs()) {
    if (p.i < 0 || p.j >= static_cast<int>(s.size())) return false;
  }
  return glue(s, m, g, s.partner_table()).has_value();
}

std::vector<Match> enumerate_matches(const SecondaryStructure& s, const Grammar& g) {
  const int n = static_cast<int>(s.size());
  const auto& seq = s.sequence();
  const auto pt = s.partner_table();
  auto free_pair = [&](int i, int j) {
    return pt[i] < 0 && pt[j] < 0 && is_admissible_pair(seq[i], seq[j]);
  };

  std::vector<Match> candidates;
  for (int i = 0; i < n; ++i) {
    if (pt[i] >= 0) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!free_pair(i, j)) continue;
      single_pair_candidates(s, pt, {i, j}, candidates);

      // Inner pairs (k,l) reachable across unpaired gaps on both sides.
      for (int k = i + 1; k < j && (k == i + 1 || pt[k - 1] < 0); ++k) {
        for (int l = j - 1; l > k && (l == j - 1 || pt[l + 1] < 0); --l) {
          if (!free_pair(k, l)) continue;
          BasePair outer{i, j}, inner{k, l};
          candidates.push_back({{two_pair_kind(outer, inner), Variant::Rule1}, {outer, inner}, {}});
        }
      }
    }
  }

  std::vector<Match> out;
  out.reserve(candidates.size());
  for (auto& m : candidates) {
    if (glue(s, m, g, pt)) out.push_back(std::move(m));
  }
  sort_unique(out);
  return out;
}

SecondaryStructure apply_match(const SecondaryStructure& s, const Match& m, const Grammar& g) {
  auto h = glue(s, m, g, s.partner_table());
  if (!h) throw GluingError(m);
  return std::move(*h);
}

SecondaryStructure invert_match(const SecondaryStructure& s, const Match& m) {
  return with_pairs_removed(s, m.added);
}

std::vector<InverseStep> enumerate_inverse_steps(const SecondaryStructure& s, const Grammar& g) {
  std::vector<InverseStep> out;
  auto consider = [&](const SecondaryStructure& source, Match m) {
    auto h = glue(source, m, g, source.partner_table());
    if (h && *h == s) out.push_back({std::move(m), source});
  };

  const auto pairs = std::vector<BasePair>(s.pairs().begin(), s.pairs().end());
  const auto pt = s.partner_table();
  for (const auto& p : pairs) {
    const BasePair removed[] = {p};
    auto source = with_pairs_removed(s, removed);
    std::vector<Match> cands;
    single_pair_candidates(source, source.partner_table(), p, cands);
    for (auto& m : cands) consider(source, std::move(m));

    auto inside = direct_branches(pt, p.i, p.j);
    if (inside && inside->size() == 1) {
      const auto& q = inside->front();
      const BasePair both[] = {p, q};
      auto source2 = with_pairs_removed(s, both);
      consider(source2, {{two_pair_kind(p, q), Variant::Rule1}, {p, q}, {}});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const InverseStep& a, const InverseStep& b) { return a.match < b.match; });
  return out;
}

Derivation derive(const SecondaryStructure& s0, const Grammar& g, std::span<const Match> script) {
  Derivation d{{}, s0};
  for (std::size_t k = 0; k < script.size(); ++k) {
    try {
      d.result = apply_match(d.result, script[k], g);
    } catch (const GluingError& e) {
      throw DerivationError(k, "derivation step " + std::to_string(k) + ": " + e.what());
    }
    d.steps.push_back(d.result);
  }
  return d;
}

}  // namespace rnagg
