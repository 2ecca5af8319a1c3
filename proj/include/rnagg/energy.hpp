#pragma once

// Loop decomposition and free-energy evaluation.
//
// A structure's energy is the sum of its loop contributions. Three models
// are available: Nussinov (-1 per pair, used as a verification oracle), a
// loop-parameter table read from a small INI file, and an external command
// that evaluates (sequence, dot-bracket) and prints a number.

#include <array>
#include <compare>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rnagg/structure.hpp"

namespace rnagg {

class ExternalEvaluator;

enum class LoopType { Hairpin, Stack, Bulge, Internal, MultiBranch, Exterior };

std::string_view to_string(LoopType t);

struct Loop {
  LoopType type = LoopType::Exterior;
  std::optional<BasePair> closing;  // absent for the exterior loop
  std::vector<BasePair> branches;   // pairs directly inside, in 5'->3' order
  int unpaired = 0;                 // unpaired positions belonging to this loop
  int left_gap = 0;                 // single-branch loops only: 5' side
  int right_gap = 0;                // single-branch loops only: 3' side
};

/// Exterior loop first, then one loop per pair in (i, j) order.
struct LoopDecomposition {
  std::vector<Loop> loops;
};

/// Requires s valid (no double pairing, no crossing).
LoopDecomposition decompose_loops(const SecondaryStructure& s);

enum class PairType { AU, CG, GC, UA, GU, UG };
inline constexpr std::size_t kPairTypes = 6;

std::optional<PairType> pair_type(Nucleotide five_prime, Nucleotide three_prime);
std::string_view to_string(PairType t);
std::optional<PairType> parse_pair_type(std::string_view s);

struct LoopTableParams {
  /// stack[outer][inner]; outer read 5'->3' as (i,j), inner as (k,l).
  std::array<std::array<double, kPairTypes>, kPairTypes> stack{};
  /// Element k holds the penalty for length k+1.
  std::vector<double> hairpin;
  std::vector<double> bulge;
  std::vector<double> internal;  // by total unpaired length
  double multi_offset = 0.0;       // a
  double multi_per_branch = 0.0;   // b, per direct branch (closing pair excluded)
  double multi_per_unpaired = 0.0; // c
};

/// Extrapolation coefficient for loop lengths beyond a table: 1.75 RT at 37 C.
inline constexpr double kLoopExtrapolation = 1.75 * 0.616;

/// table[len-1] inside the table; logarithmic extrapolation past its end.
double length_penalty(const std::vector<double>& table, int length);

/// Parses the INI parameter format (sections [stack], [hairpin], [bulge],
/// [internal], [multibranch]); throws ParseError naming the offending item.
LoopTableParams load_parameters(std::string_view text);
LoopTableParams load_parameters_file(const std::filesystem::path& path);

enum class EnergyMode { Nussinov, LoopTable, External };

std::string_view to_string(EnergyMode m);

class EnergyModel {
 public:
  static EnergyModel nussinov() { return EnergyModel(Nussinov{}); }
  static EnergyModel loop_table(LoopTableParams params) { return EnergyModel(std::move(params)); }
  static EnergyModel external(std::shared_ptr<ExternalEvaluator> evaluator);

  EnergyMode mode() const { return static_cast<EnergyMode>(impl_.index()); }
  const LoopTableParams* loop_table() const { return std::get_if<LoopTableParams>(&impl_); }
  ExternalEvaluator* external() const;

 private:
  struct Nussinov {};
  using Impl = std::variant<Nussinov, LoopTableParams, std::shared_ptr<ExternalEvaluator>>;
  explicit EnergyModel(Impl impl) : impl_(std::move(impl)) {}
  Impl impl_;
};

/// Contribution of a single loop under a parameter table.
double loop_energy(const Loop& loop, const SecondaryStructure& s, const LoopTableParams& p);

/// kcal/mol. External evaluator failures propagate as ExternalError.
double energy(const SecondaryStructure& s, const EnergyModel& m);

/// The observable O(q): +inf for a structure with no pairs, else its energy.
class Observable {
 public:
  constexpr Observable() = default;
  constexpr explicit Observable(double v) : value_(v) {}
  static constexpr Observable unfolded() {
    return Observable(std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return value_; }
  constexpr bool finite() const { return value_ != std::numeric_limits<double>::infinity(); }

  friend constexpr auto operator<=>(const Observable& a, const Observable& b) {
    return a.value_ <=> b.value_;
  }
  friend constexpr bool operator==(const Observable& a, const Observable& b) = default;

 private:
  double value_ = std::numeric_limits<double>::infinity();
};

Observable observable(const SecondaryStructure& s, const EnergyModel& m);

}  // namespace rnagg
