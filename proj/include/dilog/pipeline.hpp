#pragma once

// End-to-end policy workflow: dialogs -> samples -> trained weights ->
// crisp program -> predictions -> metrics.

#include <map>
#include <string>
#include <vector>

#include "dilog/dialog.hpp"
#include "dilog/extract.hpp"
#include "dilog/metrics.hpp"
#include "dilog/train.hpp"

namespace dilog {

struct LibraryRef {
  std::string name;
  std::map<std::string, std::string> rename;  // predicate renames applied to the library clauses
};

/// Language frame, program template and background for a policy.
struct PolicyConfig {
  LanguageFrame frame;
  ProgramTemplate program;
  std::vector<LibraryRef> libraries;
  std::vector<Clause> clauses;  // extra background clauses

  std::vector<Clause> background() const;
  /// Throws ValidationError on an invalid frame or template, unknown
  /// libraries, or background clauses over undeclared predicates or with a
  /// learnable head.
  void validate() const;
};

/// SimDial policy: targets sys_request/sys_inform/sys_query, invented pred2/0
/// and pred3/1, the `all` library over `known` and the `member` library.
PolicyConfig simdial_policy_config();

struct LabeledSample {
  int dialog = 0;
  int turn = 0;
  std::string domain;
  bool correction = false;
  BuiltSample built;
};

std::vector<LabeledSample> simdial_samples(const std::vector<Dialog>& dialogs);
std::vector<LabeledSample> multiwoz_samples(const std::vector<AnnotatedDialog>& dialogs);

/// Trains on the trainable samples only.
TrainedModel train_policy(const PolicyConfig& config, const std::vector<LabeledSample>& samples,
                          const Hyperparams& hp);

struct Prediction {
  int dialog = 0;
  int turn = 0;
  std::string domain;
  std::vector<DialogAct> acts;
};

/// Crisp inference per sample, in parallel; output order follows the input.
std::vector<Prediction> predict(const CrispProgram& program, const std::vector<LabeledSample>& samples);

/// Pairs predictions with gold samples by (dialog, turn, domain). Throws
/// ValidationError when a gold turn has no prediction or vice versa.
MetricsReport score_predictions(const std::vector<Prediction>& predicted, const std::vector<LabeledSample>& gold);

}  // namespace dilog
