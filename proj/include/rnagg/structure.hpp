#pragma once

// Primary and secondary RNA structures.
//
// A PrimarySequence is the start graph: nucleotides with implicit backbone
// bonds between neighbours. A SecondaryStructure adds base-pair edges. Both
// are immutable values; a structure shares its sequence through a
// shared_ptr so that the many states of a folding space stay cheap.

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnagg/error.hpp"

namespace rnagg {

enum class Nucleotide : std::uint8_t { A, C, G, U };

char to_char(Nucleotide n);

/// Accepts upper or lower case; 'T'/'t' maps to U.
std::optional<Nucleotide> nucleotide_from_char(char c);

/// Watson-Crick (A-U, G-C) and wobble (G-U) pairs, in either orientation.
bool is_admissible_pair(Nucleotide a, Nucleotide b);

class PrimarySequence {
 public:
  explicit PrimarySequence(std::vector<Nucleotide> bases, std::string name = {});

  std::size_t size() const { return bases_.size(); }
  Nucleotide operator[](std::size_t i) const { return bases_[i]; }
  std::span<const Nucleotide> bases() const { return bases_; }
  const std::string& name() const { return name_; }
  std::string str() const;

  friend bool operator==(const PrimarySequence&, const PrimarySequence&) = default;

 private:
  std::vector<Nucleotide> bases_;
  std::string name_;
};

using SequencePtr = std::shared_ptr<const PrimarySequence>;

/// Bare base string or a single FASTA-like record.
PrimarySequence parse_sequence(std::string_view text);

/// Every record of a FASTA-like text; a bare string yields one unnamed record.
std::vector<PrimarySequence> parse_sequences(std::string_view text);

struct BasePair {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const BasePair&, const BasePair&) = default;
};

std::string to_string(const BasePair& p);

/// True when p and q cross (a pseudoknot).
inline bool crosses(const BasePair& p, const BasePair& q) {
  return (p.i < q.i && q.i < p.j && p.j < q.j) || (q.i < p.i && p.i < q.j && q.j < p.j);
}

/// p strictly encloses q.
inline bool encloses(const BasePair& p, const BasePair& q) {
  return p.i < q.i && q.j < p.j;
}

class SecondaryStructure {
 public:
  /// The open chain G_0.
  static SecondaryStructure empty(SequencePtr seq);

  /// No validation; pairs are sorted and deduplicated. Used for fixtures and
  /// as the building block of the checked constructors.
  static SecondaryStructure unchecked(SequencePtr seq, std::vector<BasePair> pairs);

  const PrimarySequence& sequence() const { return *seq_; }
  const SequencePtr& sequence_ptr() const { return seq_; }
  std::size_t size() const { return seq_->size(); }

  /// Sorted by (i, j).
  std::span<const BasePair> pairs() const { return pairs_; }
  std::size_t pair_count() const { return pairs_.size(); }
  bool has_pair(const BasePair& p) const;

  /// partner[k] is the position paired with k, or -1. Requires that no
  /// position is paired twice and every index is in range.
  std::vector<int> partner_table() const;

  friend bool operator==(const SecondaryStructure& a, const SecondaryStructure& b) {
    return (a.seq_ == b.seq_ || *a.seq_ == *b.seq_) && a.pairs_ == b.pairs_;
  }

 private:
  SecondaryStructure(SequencePtr seq, std::vector<BasePair> pairs)
      : seq_(std::move(seq)), pairs_(std::move(pairs)) {}

  SequencePtr seq_;
  std::vector<BasePair> pairs_;
};

enum class ViolationKind {
  InadmissiblePair,
  PairedTwice,
  Crossing,
  HairpinTooSmall,
  IndexOutOfRange,
  PairMissing,  // only raised by removals
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  BasePair pair;
  std::optional<BasePair> other;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const;
  /// One violation per line.
  std::string str() const;
};

ValidationReport validate_structure(const SecondaryStructure& s, int min_hairpin_unpaired);

/// Raised when a structure would violate the validity rules.
class StructureError : public Error {
 public:
  StructureError(const std::string& what, ValidationReport report)
      : Error(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct DotBracketOptions {
  /// Permissive mode skips validation (for building counterexamples).
  bool strict = true;
  int min_hairpin_unpaired = 3;
};

/// '(' ')' pairs; '[' ']' is accepted as a second bracket type so that
/// crossing input can be read and reported. Throws ParseError on malformed
/// text and, in strict mode, StructureError with the validation report.
SecondaryStructure parse_dot_bracket(SequencePtr seq, std::string_view db,
                                     const DotBracketOptions& opts = {});

/// Requires no position paired twice and indices in range.
std::string emit_dot_bracket(const SecondaryStructure& s);

/// Canonical state identity: the dot-bracket string.
struct StructureKey {
  std::string key;

  friend auto operator<=>(const StructureKey&, const StructureKey&) = default;
};

inline StructureKey key_of(const SecondaryStructure& s) { return {emit_dot_bracket(s)}; }

/// Returns a new structure with `added` on top of `s`; throws StructureError
/// naming the offending pair when an added pair is inadmissible, touches a
/// paired position, crosses, or the result is invalid.
SecondaryStructure with_pairs_added(const SecondaryStructure& s, std::span<const BasePair> added,
                                    int min_hairpin_unpaired);

/// Inverse of with_pairs_added; throws StructureError if a pair is absent.
SecondaryStructure with_pairs_removed(const SecondaryStructure& s,
                                      std::span<const BasePair> removed);

}  // namespace rnagg
