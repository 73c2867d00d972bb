#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dilog/infer.hpp"

namespace dilog {

struct TrainedModel {
  std::shared_ptr<const ModelSpec> spec;
  ProgramTemplate program_template;
  ClauseWeights weights;
  Hyperparams hyperparams;
  std::vector<double> loss_trace;  // loss before each update, then the final loss
  int restart = 0;                 // which initialisation was kept
};

struct Problem {
  LanguageFrame frame;
  std::vector<Sample> samples;
  std::vector<Clause> background;
};

/// Full-batch RMSProp on raw clause weights. Deterministic for a given seed.
/// Throws DivergenceError when the loss becomes non-finite.
TrainedModel train(const Problem& problem, const ProgramTemplate& pt, const Hyperparams& hp);

/// Same, on an already compiled dataset.
TrainedModel train(Dataset& data, const ProgramTemplate& pt, const Hyperparams& hp);

/// First step whose recorded loss is below `threshold`, or -1.
int first_step_below(const std::vector<double>& trace, double threshold);

/// Pre-learned clause sets: "all" (list property over succ chains, using
/// `true` as the property) and "member" (succ-chain membership and its
/// usr_slots specialisation member_usr). Throws ValidationError on unknown names.
std::vector<Clause> background_library(std::string_view name);

/// Predicates that a library's clauses define or read, with arities.
std::vector<Predicate> background_library_predicates(std::string_view name);

}  // namespace dilog
