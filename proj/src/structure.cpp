#include "rnagg/structure.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rnagg {

char to_char(Nucleotide n) {
  switch (n) {
    case Nucleotide::A: return 'A';
    case Nucleotide::C: return 'C';
    case Nucleotide::G: return 'G';
    case Nucleotide::U: return 'U';
  }
  return '?';
}

std::optional<Nucleotide> nucleotide_from_char(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'A': return Nucleotide::A;
    case 'C': return Nucleotide::C;
    case 'G': return Nucleotide::G;
    case 'U':
    case 'T': return Nucleotide::U;
    default: return std::nullopt;
  }
}

bool is_admissible_pair(Nucleotide a, Nucleotide b) {
  using N = Nucleotide;
  auto is = [&](N x, N y) { return (a == x && b == y) || (a == y && b == x); };
  return is(N::G, N::C) || is(N::A, N::U) || is(N::G, N::U);
}

PrimarySequence::PrimarySequence(std::vector<Nucleotide> bases, std::string name)
    : bases_(std::move(bases)), name_(std::move(name)) {
  if (bases_.empty()) throw ParseError("empty sequence");
}

std::string PrimarySequence::str() const {
  std::string out;
  out.reserve(bases_.size());
  for (auto b : bases_) out.push_back(to_char(b));
  return out;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

PrimarySequence make_record(const std::string& raw, std::string name) {
  std::vector<Nucleotide> bases;
  bases.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    char c = raw[k];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    auto n = nucleotide_from_char(c);
    if (!n) {
      std::ostringstream msg;
      msg << "invalid nucleotide '" << c << "'";
      if (!name.empty()) msg << " in record '" << name << "'";
      throw ParseError(msg.str());
    }
    bases.push_back(*n);
  }
  if (bases.empty()) {
    throw ParseError(name.empty() ? "empty sequence" : "empty sequence in record '" + name + "'");
  }
  return PrimarySequence(std::move(bases), std::move(name));
}

}  // namespace

std::vector<PrimarySequence> parse_sequences(std::string_view text) {
  std::vector<PrimarySequence> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<std::string> name;
  std::string body;
  bool any = false;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '>') {
      if (any) out.push_back(make_record(body, name.value_or("")));
      name = trim(std::string_view(t).substr(1));
      body.clear();
      any = true;
    } else {
      body += t;
      any = true;
    }
  }
  if (!any) throw ParseError("empty sequence");
  out.push_back(make_record(body, name.value_or("")));
  return out;
}

PrimarySequence parse_sequence(std::string_view text) {
  auto records = parse_sequences(text);
  if (records.size() != 1) {
    throw ParseError("expected a single sequence record, found " + std::to_string(records.size()));
  }
  return std::move(records.front());
}

std::string to_string(const BasePair& p) {
  return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
}

SecondaryStructure SecondaryStructure::empty(SequencePtr seq) {
  return SecondaryStructure(std::move(seq), {});
}

SecondaryStructure SecondaryStructure::unchecked(SequencePtr seq, std::vector<BasePair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return SecondaryStructure(std::move(seq), std::move(pairs));
}

bool SecondaryStructure::has_pair(const BasePair& p) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), p);
}

std::vector<int> SecondaryStructure::partner_table() const {
  std::vector<int> pt(size(), -1);
  for (const auto& p : pairs_) {
    pt[p.i] = p.j;
    pt[p.j] = p.i;
  }
  return pt;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::InadmissiblePair: return "inadmissible-pair";
    case ViolationKind::PairedTwice: return "paired-twice";
    case ViolationKind::Crossing: return "crossing";
    case ViolationKind::HairpinTooSmall: return "hairpin-too-small";
    case ViolationKind::IndexOutOfRange: return "index-out-of-range";
    case ViolationKind::PairMissing: return "pair-missing";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind k) const {
  return std::any_of(violations.begin(), violations.end(),
                     [k](const Violation& v) { return v.kind == k; });
}

std::string ValidationReport::str() const {
  std::string out;
  for (const auto& v : violations) {
    out += std::string(to_string(v.kind)) + ": " + v.message + "\n";
  }
  return out;
}

ValidationReport validate_structure(const SecondaryStructure& s, int min_hairpin_unpaired) {
  ValidationReport report;
  const int n = static_cast<int>(s.size());
  const auto& seq = s.sequence();

  std::vector<BasePair> in_range;
  for (const auto& p : s.pairs()) {
    if (p.i < 0 || p.j >= n || p.i >= p.j) {
      report.violations.push_back({ViolationKind::IndexOutOfRange, p, std::nullopt,
                                   to_string(p) + " not a pair i < j within 0.." +
                                       std::to_string(n - 1)});
      continue;
    }
    in_range.push_back(p);
    if (!is_admissible_pair(seq[p.i], seq[p.j])) {
      report.violations.push_back({ViolationKind::InadmissiblePair, p, std::nullopt,
                                   to_string(p) + " pairs " + to_char(seq[p.i]) + "-" +
                                       to_char(seq[p.j])});
    }
  }

  std::vector<std::optional<BasePair>> owner(n);
  for (const auto& p : in_range) {
    for (int pos : {p.i, p.j}) {
      if (owner[pos]) {
        report.violations.push_back({ViolationKind::PairedTwice, p, owner[pos],
                                     "position " + std::to_string(pos) + " in " + to_string(p) +
                                         " and " + to_string(*owner[pos])});
      } else {
        owner[pos] = p;
      }
    }
  }

  for (std::size_t a = 0; a < in_range.size(); ++a) {
    for (std::size_t b = a + 1; b < in_range.size(); ++b) {
      if (crosses(in_range[a], in_range[b])) {
        report.violations.push_back({ViolationKind::Crossing, in_range[a], in_range[b],
                                     to_string(in_range[a]) + " crosses " +
                                         to_string(in_range[b])});
      }
    }
  }

  for (const auto& p : in_range) {
    bool innermost = std::none_of(in_range.begin(), in_range.end(),
                                  [&](const BasePair& q) { return encloses(p, q); });
    int enclosed = p.j - p.i - 1;
    if (innermost && enclosed < min_hairpin_unpaired) {
      report.violations.push_back({ViolationKind::HairpinTooSmall, p, std::nullopt,
                                   to_string(p) + " encloses " + std::to_string(enclosed) +
                                       " < " + std::to_string(min_hairpin_unpaired)});
    }
  }
  return report;
}

SecondaryStructure parse_dot_bracket(SequencePtr seq, std::string_view db,
                                     const DotBracketOptions& opts) {
  if (db.size() != seq->size()) {
    throw ParseError("dot-bracket length " + std::to_string(db.size()) +
                     " does not match sequence length " + std::to_string(seq->size()));
  }
  // '[' ']' is a second, independent bracket type. It only exists so that
  // crossing pairs can be written down and then rejected with a report.
  std::vector<int> open[2];
  std::vector<BasePair> pairs;
  for (std::size_t k = 0; k < db.size(); ++k) {
    const char c = db[k];
    if (c == '.') continue;
    const int type = (c == '[' || c == ']') ? 1 : 0;
    if (c == '(' || c == '[') {
      open[type].push_back(static_cast<int>(k));
    } else if (c == ')' || c == ']') {
      if (open[type].empty()) {
        throw ParseError(std::string("unbalanced brackets: unmatched '") + c + "' at " +
                         std::to_string(k));
      }
      pairs.push_back({open[type].back(), static_cast<int>(k)});
      open[type].pop_back();
    } else {
      throw ParseError(std::string("invalid dot-bracket character '") + c + "' at " +
                       std::to_string(k));
    }
  }
  for (int type : {0, 1}) {
    if (!open[type].empty()) {
      throw ParseError(std::string("unbalanced brackets: unmatched '") + "(["[type] + "' at " +
                       std::to_string(open[type].back()));
    }
  }
  auto s = SecondaryStructure::unchecked(std::move(seq), std::move(pairs));
  if (opts.strict) {
    auto report = validate_structure(s, opts.min_hairpin_unpaired);
    if (!report.ok()) throw StructureError("invalid structure:\n" + report.str(), report);
  }
  return s;
}

std::string emit_dot_bracket(const SecondaryStructure& s) {
  std::string out(s.size(), '.');
  for (const auto& p : s.pairs()) {
    out[p.i] = '(';
    out[p.j] = ')';
  }
  return out;
}

SecondaryStructure with_pairs_added(const SecondaryStructure& s, std::span<const BasePair> added,
                                    int min_hairpin_unpaired) {
  const int n = static_cast<int>(s.size());
  auto fail = [](ViolationKind kind, const BasePair& p, std::optional<BasePair> other,
                 const std::string& msg) {
    ValidationReport r;
    r.violations.push_back({kind, p, other, msg});
    throw StructureError("cannot add " + to_string(p) + ": " + msg, r);
  };

  auto pt = s.partner_table();
  std::vector<bool> taken(n, false);
  for (const auto& p : added) {
    if (p.i < 0 || p.j >= n || p.i >= p.j) {
      fail(ViolationKind::IndexOutOfRange, p, std::nullopt, "index out of range");
    }
    if (!is_admissible_pair(s.sequence()[p.i], s.sequence()[p.j])) {
      fail(ViolationKind::InadmissiblePair, p, std::nullopt, "inadmissible pair");
    }
    for (int pos : {p.i, p.j}) {
      if (pt[pos] >= 0 || taken[pos]) {
        fail(ViolationKind::PairedTwice, p, std::nullopt,
             "position " + std::to_string(pos) + " already paired");
      }
      taken[pos] = true;
    }
  }
  for (std::size_t a = 0; a < added.size(); ++a) {
    for (const auto& q : s.pairs()) {
      if (crosses(added[a], q)) fail(ViolationKind::Crossing, added[a], q, "crosses " + to_string(q));
    }
    for (std::size_t b = a + 1; b < added.size(); ++b) {
      if (crosses(added[a], added[b])) {
        fail(ViolationKind::Crossing, added[a], added[b], "crosses " + to_string(added[b]));
      }
    }
  }

  std::vector<BasePair> pairs(s.pairs().begin(), s.pairs().end());
  pairs.insert(pairs.end(), added.begin(), added.end());
  auto out = SecondaryStructure::unchecked(s.sequence_ptr(), std::move(pairs));
  auto report = validate_structure(out, min_hairpin_unpaired);
  if (!report.ok()) throw StructureError("result invalid:\n" + report.str(), report);
  return out;
}

SecondaryStructure with_pairs_removed(const SecondaryStructure& s,
                                      std::span<const BasePair> removed) {
  std::vector<BasePair> pairs(s.pairs().begin(), s.pairs().end());
  for (const auto& p : removed) {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), p);
    if (it == pairs.end() || *it != p) {
      ValidationReport r;
      r.violations.push_back({ViolationKind::PairMissing, p, std::nullopt, "pair not present"});
      throw StructureError("cannot remove " + to_string(p) + ": pair not present", r);
    }
    pairs.erase(it);
  }
  return SecondaryStructure::unchecked(s.sequence_ptr(), std::move(pairs));
}

}  // namespace rnagg
