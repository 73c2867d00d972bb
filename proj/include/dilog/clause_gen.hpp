#pragma once

// Candidate-clause enumeration from rule templates, and complexity-ordered
// search over program templates.

#include <string>
#include <vector>

#include "dilog/logic.hpp"

namespace dilog {

/// Enumeration control for one clause slot.
struct RuleTemplate {
  int extra_variables = 0;         // v: existentially quantified body variables
  bool allow_intensional = false;  // i: learnable predicates may appear in bodies

  bool operator==(const RuleTemplate&) const = default;
};

inline constexpr int kMaxExtraVariables = 2;

struct PredicateSlots {
  Predicate predicate;
  std::vector<RuleTemplate> slots;  // one or two
};

struct ProgramTemplate {
  /// Learnable predicates (targets and auxiliaries) with their slots, in order.
  std::vector<PredicateSlots> predicates;
  /// Invented predicates; learnable but never labelled in samples.
  std::vector<Predicate> auxiliary;
  int forward_steps = 10;

  /// Canonical one-line form; used for tie-breaking and reports.
  std::string serialize() const;
  /// Throws ValidationError on a slot count outside 1..2, v out of range, or a
  /// learnable predicate without slots.
  void validate() const;
};

/// Body-atom sources for generate_clauses.
struct PredicatePool {
  std::vector<Predicate> extensional;
  std::vector<Predicate> intensional;  // used only when the template allows it

  /// Extensional predicates of the frame; targets plus auxiliaries as intensional.
  static PredicatePool from(const LanguageFrame& frame, const std::vector<Predicate>& auxiliary);
};

/// Every safe, canonical, duplicate-free two-atom-body clause for `head` whose
/// variables are the head's plus `extra_variables` fresh ones. Clauses with a
/// body atom equal to the head atom are dropped. Output is sorted.
std::vector<Clause> generate_clauses(const Predicate& head, const RuleTemplate& tmpl, const PredicatePool& pool);

/// Total candidate-clause count over every (predicate, slot) of the template.
std::size_t template_complexity(const ProgramTemplate& pt, const LanguageFrame& frame);

struct TemplateGrid {
  int v_max = kMaxExtraVariables;
  std::vector<int> slot_counts{1};
  int max_auxiliary = 0;                      // 0..2
  std::vector<int> auxiliary_arities{0, 1, 2};
  int forward_steps = 10;
};

/// Every program template on the grid (one rule template per learnable
/// predicate, shared by its slots), sorted by complexity then serialization.
std::vector<ProgramTemplate> enumerate_templates(const LanguageFrame& frame, const TemplateGrid& grid);

}  // namespace dilog
