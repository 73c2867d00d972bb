#pragma once

// Differentiable forward chaining over ground atoms.
//
// One step maps a valuation a_t in [0,1]^g to a_{t+1}:
//   F_c(h)   = max over groundings of clause c with head h of a[b1] * a[b2]
//   S(h)     = sum_c softmax(w_slot)_c * F_c(h)            (per slot)
//   D_p(h)   = S_1(h)  or  S_1 + S_2 - S_1 S_2             (one or two slots)
//   a_{t+1}  = max(a_t, D)   (or a_t + D - a_t D with probabilistic-sum amalgamation)
// Background clauses act like one-hot slots and are never trained.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dilog/clause_gen.hpp"
#include "dilog/logic.hpp"

namespace dilog {

enum class Amalgamation { Max, ProbabilisticSum };

std::string to_string(Amalgamation a);
Amalgamation parse_amalgamation(std::string_view s);

using Valuation = std::vector<double>;

struct Sample {
  std::vector<Atom> background;
  std::vector<Atom> positive;
  std::vector<Atom> negative;
  std::vector<std::string> constants;

  /// Throws ValidationError unless P and N are disjoint, labelled atoms use
  /// only the given target predicates, and every atom grounds over constants.
  void validate(const std::vector<Predicate>& targets) const;
};

struct SlotClauses {
  Predicate predicate;
  RuleTemplate rule;
  std::vector<Clause> clauses;
};

/// Constant-independent description of a trainable program: clause pools per
/// slot plus frozen background clauses.
struct ModelSpec {
  LanguageFrame frame;
  std::vector<Predicate> auxiliary;
  std::vector<SlotClauses> slots;
  std::vector<Clause> background;
  int forward_steps = 10;
  Amalgamation amalgamation = Amalgamation::Max;

  /// Targets, auxiliaries, then extensional predicates.
  std::vector<Predicate> predicates() const;
  std::size_t clause_count() const;
};

struct SpecOptions {
  Amalgamation amalgamation = Amalgamation::Max;
  std::size_t clause_budget = 20000;
};

/// Generates every slot's candidate pool. Throws ValidationError when the pool
/// exceeds the budget, when a background head is learnable, or when a clause
/// mentions an undeclared predicate.
ModelSpec build_model_spec(const ProgramTemplate& pt, const LanguageFrame& frame, std::vector<Clause> background,
                           const SpecOptions& options = {});

/// Raw clause weights, one contiguous run per slot.
class ClauseWeights {
 public:
  ClauseWeights() = default;
  explicit ClauseWeights(const ModelSpec& spec);

  std::size_t slot_count() const noexcept { return offsets_.size() - 1; }
  std::size_t size() const noexcept { return raw_.size(); }
  std::span<double> slot(std::size_t k) { return {raw_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]}; }
  std::span<const double> slot(std::size_t k) const {
    return {raw_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  std::size_t offset(std::size_t k) const { return offsets_[k]; }
  std::vector<double>& raw() noexcept { return raw_; }
  const std::vector<double>& raw() const noexcept { return raw_; }

  /// Per-slot softmax, laid out like raw().
  std::vector<double> probabilities() const;

 private:
  std::vector<double> raw_;
  std::vector<std::size_t> offsets_{0};
};

/// One clause's groundings in CSR form over the local head index of its
/// predicate block.
struct GroundedClause {
  std::vector<std::uint32_t> head_start;
  std::vector<std::array<std::uint32_t, 2>> bodies;
  std::vector<GroundRule> rules;  // flat form, used by the reference kernel
};

struct CompiledSlot {
  std::size_t weight_offset = 0;
  std::vector<GroundedClause> clauses;
};

struct DerivedBlock {
  std::size_t offset = 0;
  std::size_t size = 0;
  std::vector<std::size_t> slots;  // indices into CompiledModel::slots
};

/// A ModelSpec grounded over one constant list.
struct CompiledModel {
  GroundIndex index;
  std::vector<CompiledSlot> slots;
  std::vector<DerivedBlock> learnable;   // one per learnable predicate
  std::vector<DerivedBlock> background_heads;
  std::vector<GroundRule> background_rules;
  std::vector<bool> derived;             // atom is a head of some learnable or background clause
  int forward_steps = 10;
  Amalgamation amalgamation = Amalgamation::Max;

  std::size_t size() const noexcept { return index.size(); }
};

CompiledModel compile(const ModelSpec& spec, const std::vector<std::string>& constants);
/// Builds the spec from a template and compiles it in one go.
CompiledModel compile(const ProgramTemplate& pt, const LanguageFrame& frame, const std::vector<std::string>& constants,
                      const std::vector<Clause>& background = {});

/// B atoms set to 1, everything else 0. Throws ValidationError for atoms
/// outside the index.
Valuation init_valuation(const Sample& sample, const CompiledModel& model);

/// One differentiable deduction step; `probabilities` from ClauseWeights.
Valuation step(const CompiledModel& model, std::span<const double> probabilities, std::span<const double> valuation);

/// forward_steps chained steps. When `trace` is non-null it receives every
/// intermediate valuation including the initial one.
Valuation infer(const CompiledModel& model, std::span<const double> probabilities, Valuation initial,
                std::vector<Valuation>* trace = nullptr);
Valuation infer(const CompiledModel& model, const ClauseWeights& weights, const Sample& sample);

/// Running totals of step-level invariant checks (valuation stays in [0,1]
/// and never decreases). Process-wide; safe to read from any thread.
struct InvariantCounters {
  std::uint64_t steps_checked = 0;
  std::uint64_t violations = 0;
};
InvariantCounters invariant_counters();
void reset_invariant_counters();

enum class Regularizer { None, L1, L2 };
std::string to_string(Regularizer r);
Regularizer parse_regularizer(std::string_view s);

struct Hyperparams {
  double learning_rate = 0.05;
  int training_steps = 6000;
  Regularizer regularizer = Regularizer::None;
  double reg_lambda = 0.0;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  Amalgamation amalgamation = Amalgamation::Max;
  /// Independent initialisations tried; the lowest final loss is kept.
  int restarts = 1;

  void validate() const;
};

/// A sample grounded against its compiled model, with labels as indices.
struct CompiledSample {
  std::shared_ptr<const CompiledModel> model;
  Valuation initial;
  std::vector<std::uint32_t> positive;
  std::vector<std::uint32_t> negative;
};

/// Samples compiled against one ModelSpec; models are shared between samples
/// with the same constant list.
class Dataset {
 public:
  Dataset(std::shared_ptr<const ModelSpec> spec, std::span<const Sample> samples);

  const ModelSpec& spec() const noexcept { return *spec_; }
  std::shared_ptr<const ModelSpec> spec_ptr() const noexcept { return spec_; }
  const std::vector<CompiledSample>& samples() const noexcept { return samples_; }
  std::shared_ptr<const CompiledModel> model_for(const std::vector<std::string>& constants);

 private:
  std::shared_ptr<const ModelSpec> spec_;
  std::map<std::vector<std::string>, std::shared_ptr<const CompiledModel>> cache_;
  std::vector<CompiledSample> samples_;
};

inline constexpr double kLogEpsilon = 1e-6;

struct Objective {
  double loss = 0.0;
  std::vector<double> gradient;  // w.r.t. raw weights; empty unless requested
};

/// Mean per-sample cross-entropy plus regularizer, optionally with the exact
/// reverse-mode gradient. Samples run in parallel; the reduction order is
/// fixed so results do not depend on thread count. A sample without labels
/// contributes zero loss.
Objective evaluate(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp, bool with_gradient);

double loss(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp);
std::vector<double> grad(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp);

namespace reference {

/// Straight-line serial implementation of step and evaluate, kept as the
/// cross-check for the optimised kernels.
Valuation step(const CompiledModel& model, std::span<const double> probabilities, std::span<const double> valuation);
Objective evaluate(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp, bool with_gradient);

}  // namespace reference

}  // namespace dilog
