#pragma once

// The RNA graph grammar: eleven additive productions over secondary
// structures. Each production adds one or two base pairs; its left-hand side
// is expressed as a site predicate over the host structure (which positions
// must be unpaired, which pairs must already exist). Because no production
// deletes anything, the dangling and identification conditions of a double
// pushout step are vacuous and a derivation step reduces to checking the
// site predicate plus global validity, then inserting the pairs.

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnagg/structure.hpp"

namespace rnagg {

enum class LoopKind { Hairpin, BulgeR, BulgeL, Helix, InternalLoop, MultiBranch };
enum class Variant { Rule1, Rule2 };

std::string_view to_string(LoopKind k);

/// Accepts the canonical names and lowercase/hyphenated spellings
/// ("hairpin", "bulge-r", "internal-loop", "multi-branch", ...).
std::optional<LoopKind> parse_loop_kind(std::string_view s);

struct RuleId {
  LoopKind loop_kind = LoopKind::Hairpin;
  Variant variant = Variant::Rule1;

  friend auto operator<=>(const RuleId&, const RuleId&) = default;
};

/// "Hairpin-Rule1", "Helix-Rule2", ...
std::string to_string(RuleId r);
std::optional<RuleId> parse_rule_id(std::string_view s);

/// The eleven productions in canonical order (Hairpin has no Rule2).
const std::array<RuleId, 11>& all_rules();

/// Human-readable site predicate, (i,j) the added outer pair.
std::string_view site_predicate(RuleId r);

/// A concrete occurrence of a production's left-hand side: the pairs the
/// step adds and the pre-existing pairs its pattern relies on.
struct Match {
  RuleId rule;
  std::vector<BasePair> added;    // sorted
  std::vector<BasePair> context;  // sorted; empty for two-pair Rule1 variants

  friend auto operator<=>(const Match&, const Match&) = default;
};

std::string to_string(const Match& m);

struct Grammar {
  int min_hairpin_unpaired = 3;
  /// Reverse steps are available to the controller during adaptation.
  bool allow_inverse = false;

  /// Weakest hairpin bound the rules allow: one enclosed base.
  static Grammar minimal_hairpin() { return Grammar{1, false}; }

  std::span<const RuleId> rules() const { return all_rules(); }
};

/// Applicability of m on s: rule shape, admissible unpaired endpoints, the
/// rule's site predicate, and validity of the result.
bool gluing_check(const SecondaryStructure& s, const Match& m, const Grammar& g);

/// Every match passing gluing_check, sorted by (rule, added, context).
std::vector<Match> enumerate_matches(const SecondaryStructure& s, const Grammar& g);

class GluingError : public Error {
 public:
  explicit GluingError(const Match& m)
      : Error("match " + to_string(m) + " violates the gluing conditions"), match_(m) {}
  const Match& match() const { return match_; }

 private:
  Match match_;
};

/// Direct derivation step s =>(p,m) H. Throws GluingError.
SecondaryStructure apply_match(const SecondaryStructure& s, const Match& m, const Grammar& g);

/// Removes m.added from s. Throws StructureError if a pair is absent.
SecondaryStructure invert_match(const SecondaryStructure& s, const Match& m);

/// All (G, m) with apply_match(G, m) == s, i.e. the reverse transitions
/// into s. Sorted by match.
struct InverseStep {
  Match match;
  SecondaryStructure source;
};
std::vector<InverseStep> enumerate_inverse_steps(const SecondaryStructure& s, const Grammar& g);

class DerivationError : public Error {
 public:
  DerivationError(std::size_t step, const std::string& what) : Error(what), step_(step) {}
  /// Zero-based index into the script.
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct Derivation {
  /// G_1 .. G_n; empty for an empty script.
  std::vector<SecondaryStructure> steps;
  SecondaryStructure result;
};

/// Folds apply_match over the script. Throws DerivationError at the first
/// failing step.
Derivation derive(const SecondaryStructure& s0, const Grammar& g, std::span<const Match> script);

}  // namespace rnagg
