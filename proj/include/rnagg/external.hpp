#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string_view>
#include <string>
#include <unordered_map>

#include "rnagg/error.hpp"
#include "rnagg/structure.hpp"

namespace rnagg {

enum class ExternalErrorKind { NotFound, Failed, Unparsable, Timeout };

std::string_view to_string(ExternalErrorKind k);

class ExternalError : public Error {
 public:
  ExternalError(ExternalErrorKind kind, const std::string& what, std::string output)
      : Error(what), kind_(kind), output_(std::move(output)) {}
  ExternalErrorKind kind() const { return kind_; }
  /// Captured stdout followed by stderr.
  const std::string& output() const { return output_; }

 private:
  ExternalErrorKind kind_;
  std::string output_;
};

/// Wraps a shell command that reads two lines (sequence, dot-bracket) on
/// stdin and prints one energy in kcal/mol. Results are cached per
/// (sequence, structure). Calls are serialized unless the command is
/// declared safe for concurrent use.
class ExternalEvaluator {
 public:
  struct Options {
    std::string command;
    std::chrono::milliseconds timeout{10'000};
    bool concurrent_safe = false;
  };

  explicit ExternalEvaluator(Options opts) : opts_(std::move(opts)) {}

  double evaluate(const PrimarySequence& seq, const SecondaryStructure& s);

  /// Number of processes actually launched.
  std::size_t invocations() const;
  const Options& options() const { return opts_; }

 private:
  double run_command(const std::string& input);

  Options opts_;
  mutable std::mutex cache_mutex_;
  std::mutex call_mutex_;
  std::unordered_map<std::string, double> cache_;
  std::size_t invocations_ = 0;
};

inline double external_evaluate(ExternalEvaluator& adapter, const PrimarySequence& seq,
                                const SecondaryStructure& s) {
  return adapter.evaluate(seq, s);
}

/// Parses a single decimal number, tolerating surrounding whitespace and a
/// Unicode minus sign; nullopt otherwise.
std::optional<double> parse_energy_value(std::string_view text);

}  // namespace rnagg
