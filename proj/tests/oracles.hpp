#pragma once

// Independent reference implementations used only by the tests. None of
// them calls into the grammar engine: structures are enumerated directly
// from the validity rules, matches are classified from the loop tree of the
// structure after the addition, and the Nussinov optimum comes from the
// textbook dynamic program.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rnagg/grammar.hpp"
#include "rnagg/structure.hpp"

namespace oracle {

using rnagg::BasePair;
using rnagg::LoopKind;
using rnagg::Match;
using rnagg::Variant;

inline rnagg::SequencePtr seq(const std::string& s) {
  return std::make_shared<const rnagg::PrimarySequence>(rnagg::parse_sequence(s));
}

inline bool pairs_ok(const rnagg::PrimarySequence& s, int i, int j) {
  return rnagg::is_admissible_pair(s[i], s[j]);
}

/// Every valid pseudoknot-free structure, as dot-bracket strings, sorted.
inline std::vector<std::string> all_structures(const rnagg::PrimarySequence& s, int min_hairpin) {
  const int n = static_cast<int>(s.size());
  // memo[i] = all structures of the suffix interval [i, end) for a given end
  // would need a 2D table; n stays small, so recurse on intervals directly.
  std::vector<std::vector<std::vector<std::string>>> memo(
      n + 1, std::vector<std::vector<std::string>>(n + 1));
  std::vector<std::vector<bool>> done(n + 1, std::vector<bool>(n + 1, false));
  auto rec = [&](auto&& self, int i, int j) -> const std::vector<std::string>& {
    // structures of positions i..j-1
    if (done[i][j]) return memo[i][j];
    std::vector<std::string> out;
    if (i >= j) {
      out.push_back("");
    } else {
      for (const auto& rest : self(self, i + 1, j)) out.push_back("." + rest);
      for (int k = i + min_hairpin + 1; k < j; ++k) {
        if (!pairs_ok(s, i, k)) continue;
        const auto inner = self(self, i + 1, k);
        const auto tail = self(self, k + 1, j);
        for (const auto& a : inner) {
          for (const auto& b : tail) out.push_back("(" + a + ")" + b);
        }
      }
    }
    done[i][j] = true;
    memo[i][j] = std::move(out);
    return memo[i][j];
  };
  auto out = rec(rec, 0, n);
  std::sort(out.begin(), out.end());
  return out;
}

/// Maximum number of pairs (the Nussinov optimum is its negation).
inline int nussinov_max_pairs(const rnagg::PrimarySequence& s, int min_hairpin) {
  const int n = static_cast<int>(s.size());
  std::vector<std::vector<int>> N(n + 1, std::vector<int>(n + 1, 0));
  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len - 1;
      int best = i + 1 <= j ? N[i + 1][j] : 0;
      for (int k = i + min_hairpin + 1; k <= j; ++k) {
        if (!pairs_ok(s, i, k)) continue;
        int inner = i + 1 <= k - 1 ? N[i + 1][k - 1] : 0;
        int tail = k + 1 <= j ? N[k + 1][j] : 0;
        best = std::max(best, 1 + inner + tail);
      }
      N[i][j] = best;
    }
  }
  return n ? N[0][n - 1] : 0;
}

/// Partner table of a dot-bracket string.
inline std::vector<int> partners(const std::string& db) {
  std::vector<int> pt(db.size(), -1), stack;
  for (int k = 0; k < static_cast<int>(db.size()); ++k) {
    if (db[k] == '(') stack.push_back(k);
    if (db[k] == ')') {
      pt[k] = stack.back();
      pt[stack.back()] = k;
      stack.pop_back();
    }
  }
  return pt;
}

/// Pairs directly inside (i,j) in the loop tree given by pt.
inline std::vector<BasePair> children(const std::vector<int>& pt, int i, int j) {
  std::vector<BasePair> out;
  for (int k = i + 1; k < j; ++k) {
    if (pt[k] > k) {
      out.push_back({k, pt[k]});
      k = pt[k];
    }
  }
  return out;
}

/// Innermost pair enclosing position range (i,j), if any.
inline std::optional<BasePair> parent(const std::vector<int>& pt, int i, int j) {
  for (int k = i - 1; k >= 0; --k) {
    if (pt[k] > j) return BasePair{k, pt[k]};
    if (pt[k] >= 0 && pt[k] < k) k = pt[k];
  }
  return std::nullopt;
}

inline LoopKind gap_kind(const BasePair& outer, const BasePair& inner) {
  const int left = inner.i - outer.i - 1;
  const int right = outer.j - inner.j - 1;
  if (left == 0 && right == 0) return LoopKind::Helix;
  if (left == 0) return LoopKind::BulgeR;
  if (right == 0) return LoopKind::BulgeL;
  return LoopKind::InternalLoop;
}

inline bool valid_db(const rnagg::PrimarySequence& s, const std::string& db, int min_hairpin) {
  auto pt = partners(db);
  for (int i = 0; i < static_cast<int>(db.size()); ++i) {
    if (pt[i] <= i) continue;
    if (!pairs_ok(s, i, pt[i])) return false;
    if (children(pt, i, pt[i]).empty() && pt[i] - i - 1 < min_hairpin) return false;
  }
  return true;
}

/// All matches on `db`, found by trying every addition of one or two free
/// pairs and reading the rule off the loop tree of the result.
inline std::vector<Match> classify_matches(const rnagg::PrimarySequence& s, const std::string& db,
                                           int min_hairpin) {
  const int n = static_cast<int>(db.size());
  const auto pt0 = partners(db);
  std::vector<BasePair> free;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (pt0[i] < 0 && pt0[j] < 0 && pairs_ok(s, i, j)) free.push_back({i, j});
    }
  }
  auto with = [&](std::initializer_list<BasePair> add) -> std::optional<std::string> {
    std::string t = db;
    for (const auto& p : add) {
      if (t[p.i] != '.' || t[p.j] != '.') return std::nullopt;
      t[p.i] = '(';
      t[p.j] = ')';
    }
    // reject crossings: the bracket string must rebuild the same pairs
    auto pt = partners(t);
    for (const auto& p : add) {
      if (pt[p.i] != p.j) return std::nullopt;
    }
    for (int k = 0; k < n; ++k) {
      if (pt0[k] >= 0 && pt[k] != pt0[k]) return std::nullopt;
    }
    if (!valid_db(s, t, min_hairpin)) return std::nullopt;
    return t;
  };

  std::vector<Match> out;
  for (const auto& a : free) {
    auto t = with({a});
    if (!t) continue;
    auto pt = partners(*t);
    auto kids = children(pt, a.i, a.j);
    if (kids.empty()) out.push_back({{LoopKind::Hairpin, Variant::Rule1}, {a}, {}});
    if (kids.size() == 1) out.push_back({{gap_kind(a, kids[0]), Variant::Rule2}, {a}, {kids[0]}});
    if (kids.size() >= 2) {
      out.push_back({{LoopKind::MultiBranch, kids.size() == 2 ? Variant::Rule1 : Variant::Rule2},
                     {a},
                     kids});
    }
    if (auto p = parent(pt, a.i, a.j)) {
      auto siblings = children(pt, p->i, p->j);
      if (siblings.size() == 1) out.push_back({{gap_kind(*p, a), Variant::Rule2}, {a}, {*p}});
    }
  }
  for (const auto& a : free) {
    for (const auto& b : free) {
      if (!rnagg::encloses(a, b)) continue;
      auto t = with({a, b});
      if (!t) continue;
      auto kids = children(partners(*t), a.i, a.j);
      if (kids.size() == 1 && kids[0] == b) {
        out.push_back({{gap_kind(a, b), Variant::Rule1}, {a, b}, {}});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Portable pseudo-random sequences: the mapping from engine output to
/// letters is fixed here rather than left to a distribution.
class SequenceGen {
 public:
  explicit SequenceGen(std::uint32_t seed) : eng_(seed) {}
  std::string next(int n) {
    static const char letters[] = "ACGU";
    std::string out;
    for (int k = 0; k < n; ++k) out.push_back(letters[eng_() % 4]);
    return out;
  }
  std::uint32_t below(std::uint32_t bound) { return static_cast<std::uint32_t>(eng_() % bound); }

 private:
  std::mt19937 eng_;
};

}  // namespace oracle
