#include "rnagg/energy.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rnagg/external.hpp"

namespace rnagg {

std::string_view to_string(LoopType t) {
  switch (t) {
    case LoopType::Hairpin: return "Hairpin";
    case LoopType::Stack: return "Stack";
    case LoopType::Bulge: return "Bulge";
    case LoopType::Internal: return "Internal";
    case LoopType::MultiBranch: return "MultiBranch";
    case LoopType::Exterior: return "Exterior";
  }
  return "?";
}

namespace {

/// Scans (from, to) exclusive, collecting direct branches and unpaired count.
void scan_interior(const std::vector<int>& pt, int from, int to, Loop& loop) {
  int k = from + 1;
  while (k < to) {
    if (pt[k] < 0) {
      ++loop.unpaired;
      ++k;
    } else {
      loop.branches.push_back({k, pt[k]});
      k = pt[k] + 1;
    }
  }
}

}  // namespace

LoopDecomposition decompose_loops(const SecondaryStructure& s) {
  const int n = static_cast<int>(s.size());
  const auto pt = s.partner_table();
  LoopDecomposition d;

  Loop exterior;
  scan_interior(pt, -1, n, exterior);
  d.loops.push_back(std::move(exterior));

  for (const auto& p : s.pairs()) {
    Loop loop;
    loop.closing = p;
    scan_interior(pt, p.i, p.j, loop);
    switch (loop.branches.size()) {
      case 0:
        loop.type = LoopType::Hairpin;
        break;
      case 1: {
        const auto& b = loop.branches.front();
        loop.left_gap = b.i - p.i - 1;
        loop.right_gap = p.j - b.j - 1;
        if (loop.left_gap == 0 && loop.right_gap == 0) {
          loop.type = LoopType::Stack;
        } else if (loop.left_gap == 0 || loop.right_gap == 0) {
          loop.type = LoopType::Bulge;
        } else {
          loop.type = LoopType::Internal;
        }
        break;
      }
      default:
        loop.type = LoopType::MultiBranch;
    }
    d.loops.push_back(std::move(loop));
  }
  return d;
}

std::optional<PairType> pair_type(Nucleotide a, Nucleotide b) {
  using N = Nucleotide;
  if (a == N::A && b == N::U) return PairType::AU;
  if (a == N::C && b == N::G) return PairType::CG;
  if (a == N::G && b == N::C) return PairType::GC;
  if (a == N::U && b == N::A) return PairType::UA;
  if (a == N::G && b == N::U) return PairType::GU;
  if (a == N::U && b == N::G) return PairType::UG;
  return std::nullopt;
}

std::string_view to_string(PairType t) {
  static constexpr std::string_view names[] = {"AU", "CG", "GC", "UA", "GU", "UG"};
  return names[static_cast<std::size_t>(t)];
}

std::optional<PairType> parse_pair_type(std::string_view s) {
  if (s.size() != 2) return std::nullopt;
  auto a = nucleotide_from_char(s[0]);
  auto b = nucleotide_from_char(s[1]);
  if (!a || !b) return std::nullopt;
  return pair_type(*a, *b);
}

double length_penalty(const std::vector<double>& table, int length) {
  if (table.empty()) throw ConfigError("empty loop-length table");
  if (length < 1) throw ConfigError("loop length must be positive, got " + std::to_string(length));
  const int max = static_cast<int>(table.size());
  if (length <= max) return table[length - 1];
  return table.back() + kLoopExtrapolation * std::log(static_cast<double>(length) / max);
}

namespace {

namespace pt = boost::property_tree;

constexpr std::size_t kMaxTableLength = 30;

double parse_number(const std::string& text, const std::string& where) {
  std::string t = text;
  t.erase(0, t.find_first_not_of(" \t"));
  t.erase(t.find_last_not_of(" \t") + 1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ParseError("malformed number '" + text + "' in " + where);
  }
  return v;
}

const pt::ptree& section(const pt::ptree& root, const std::string& name) {
  auto it = root.find(name);
  if (it == root.not_found()) throw ParseError("missing section [" + name + "]");
  return it->second;
}

std::vector<double> length_table(const pt::ptree& root, const std::string& name) {
  const auto& sec = section(root, name);
  std::vector<double> out;
  for (const auto& [key, node] : sec) {
    if (key != "values") throw ParseError("unknown key '" + key + "' in [" + name + "]");
    std::istringstream in(node.data());
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok, "[" + name + "] values"));
  }
  if (out.empty() || out.size() > kMaxTableLength) {
    throw ParseError("wrong array length " + std::to_string(out.size()) + " in [" + name +
                     "] (expected 1.." + std::to_string(kMaxTableLength) + ")");
  }
  return out;
}

}  // namespace

LoopTableParams load_parameters(std::string_view text) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("parameter file: ") + e.what());
  }

  static const std::set<std::string> known = {"stack", "hairpin", "bulge", "internal", "multibranch"};
  for (const auto& [name, node] : root) {
    if (!known.contains(name)) throw ParseError("unknown section [" + name + "]");
  }

  LoopTableParams p;
  const auto& stack = section(root, "stack");
  std::array<std::array<bool, kPairTypes>, kPairTypes> seen{};
  std::size_t entries = 0;
  for (const auto& [key, node] : stack) {
    auto dash = key.find('-');
    auto outer = parse_pair_type(key.substr(0, dash == std::string::npos ? key.size() : dash));
    auto inner = dash == std::string::npos ? std::nullopt : parse_pair_type(key.substr(dash + 1));
    if (!outer || !inner) throw ParseError("stack entry '" + key + "' is not an admissible pair type");
    auto o = static_cast<std::size_t>(*outer), i = static_cast<std::size_t>(*inner);
    if (seen[o][i]) throw ParseError("duplicate stack entry '" + key + "'");
    seen[o][i] = true;
    p.stack[o][i] = parse_number(node.data(), "[stack] " + key);
    ++entries;
  }
  if (entries != kPairTypes * kPairTypes) {
    throw ParseError("wrong array length: [stack] has " + std::to_string(entries) +
                     " entries, expected 36");
  }

  p.hairpin = length_table(root, "hairpin");
  p.bulge = length_table(root, "bulge");
  p.internal = length_table(root, "internal");

  const auto& multi = section(root, "multibranch");
  bool a = false, b = false, c = false;
  for (const auto& [key, node] : multi) {
    double v = parse_number(node.data(), "[multibranch] " + key);
    if (key == "a") {
      p.multi_offset = v;
      a = true;
    } else if (key == "b") {
      p.multi_per_branch = v;
      b = true;
    } else if (key == "c") {
      p.multi_per_unpaired = v;
      c = true;
    } else {
      throw ParseError("unknown key '" + key + "' in [multibranch]");
    }
  }
  if (!a || !b || !c) throw ParseError("[multibranch] requires keys a, b and c");
  return p;
}

LoopTableParams load_parameters_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read parameter file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_parameters(buf.str());
}

std::string_view to_string(EnergyMode m) {
  switch (m) {
    case EnergyMode::Nussinov: return "nussinov";
    case EnergyMode::LoopTable: return "loop-table";
    case EnergyMode::External: return "external";
  }
  return "?";
}

EnergyModel EnergyModel::external(std::shared_ptr<ExternalEvaluator> evaluator) {
  if (!evaluator) throw ConfigError("external energy mode requires an evaluator");
  return EnergyModel(std::move(evaluator));
}

ExternalEvaluator* EnergyModel::external() const {
  auto* p = std::get_if<std::shared_ptr<ExternalEvaluator>>(&impl_);
  return p ? p->get() : nullptr;
}

double loop_energy(const Loop& loop, const SecondaryStructure& s, const LoopTableParams& p) {
  const auto& seq = s.sequence();
  auto type_of = [&](const BasePair& bp) {
    auto t = pair_type(seq[bp.i], seq[bp.j]);
    if (!t) throw ConfigError("inadmissible pair " + to_string(bp) + " has no energy");
    return static_cast<std::size_t>(*t);
  };
  switch (loop.type) {
    case LoopType::Exterior:
      return 0.0;
    case LoopType::Hairpin:
      return length_penalty(p.hairpin, loop.unpaired);
    case LoopType::Stack:
      return p.stack[type_of(*loop.closing)][type_of(loop.branches.front())];
    case LoopType::Bulge:
      return length_penalty(p.bulge, loop.unpaired);
    case LoopType::Internal:
      return length_penalty(p.internal, loop.unpaired);
    case LoopType::MultiBranch:
      return p.multi_offset + p.multi_per_branch * static_cast<double>(loop.branches.size()) +
             p.multi_per_unpaired * loop.unpaired;
  }
  return 0.0;
}

double energy(const SecondaryStructure& s, const EnergyModel& m) {
  switch (m.mode()) {
    case EnergyMode::Nussinov:
      return -static_cast<double>(s.pair_count());
    case EnergyMode::LoopTable: {
      double total = 0.0;
      for (const auto& loop : decompose_loops(s).loops) total += loop_energy(loop, s, *m.loop_table());
      return total;
    }
    case EnergyMode::External:
      return m.external()->evaluate(s.sequence(), s);
  }
  return 0.0;
}

Observable observable(const SecondaryStructure& s, const EnergyModel& m) {
  if (s.pair_count() == 0) return Observable::unfolded();
  return Observable(energy(s, m));
}

}  // namespace rnagg
