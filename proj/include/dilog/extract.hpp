#pragma once

// Crisp programs read off trained clause weights.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dilog/infer.hpp"
#include "dilog/train.hpp"

namespace dilog {

struct ProgramEntry {
  Predicate predicate;
  int slot = 0;  // slot index within the predicate
  Clause clause;
  double probability = 0.0;
  bool argmax = false;
};

/// Argmax clause per slot (plus any other clause above the threshold, kept
/// for inspection) and the frozen background. Only argmax entries take part
/// in crisp inference.
struct PolicyProgram {
  LanguageFrame frame;
  std::vector<Predicate> auxiliary;
  std::vector<Clause> background;
  int forward_steps = 10;
  std::vector<ProgramEntry> entries;  // grouped by (predicate, slot), argmax first

  /// Argmax clause of each slot of `p`, in slot order.
  std::vector<Clause> rules_for(const Predicate& p) const;
  /// Throws ValidationError unless every slot has exactly one argmax entry
  /// and clauses only use declared predicates.
  void validate() const;
};

PolicyProgram extract_program(const TrainedModel& model, double threshold = 0.1);

/// Text form:
///   steps N
///   targets p/1 ...
///   extensional q/1 ...
///   auxiliary pred2/0 ...
///   background <clause>
///   slot <pred/arity> <k>
///   <probability> <clause>        (first line of a slot is the argmax)
std::string format_program(const PolicyProgram& program);
PolicyProgram parse_program(std::string_view text);

/// Crisp forward chaining with the argmax clauses. Compiled models are cached
/// per constant list; safe to call from several threads.
class CrispProgram {
 public:
  explicit CrispProgram(PolicyProgram program);

  const PolicyProgram& program() const noexcept { return program_; }

  /// Every true ground atom after forward_steps steps.
  std::vector<Atom> infer(const std::vector<Atom>& background, const std::vector<std::string>& constants) const;
  /// True atoms of the target predicates only.
  std::vector<Atom> predict(const Sample& sample) const;
  /// Labelled atoms of the sample classified wrongly (P false or N true).
  std::size_t errors(const Sample& sample) const;

 private:
  std::shared_ptr<const CompiledModel> model_for(const std::vector<std::string>& constants) const;

  PolicyProgram program_;
  ModelSpec spec_;
  std::vector<double> ones_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<std::string>, std::shared_ptr<const CompiledModel>> cache_;
};

/// Fraction of labelled atoms over all samples that the crisp program
/// classifies correctly.
double agreement(const CrispProgram& program, const std::vector<Sample>& samples);

}  // namespace dilog
