#include "dilog/pipeline.hpp"

#include <set>
#include <tuple>

#include "dilog/error.hpp"

namespace dilog {

std::vector<Clause> PolicyConfig::background() const {
  std::vector<Clause> out;
  for (const LibraryRef& lib : libraries) {
    for (const Clause& c : background_library(lib.name)) out.push_back(rename_predicates(c, lib.rename));
  }
  out.insert(out.end(), clauses.begin(), clauses.end());
  return out;
}

void PolicyConfig::validate() const {
  frame.validate();
  program.validate();
  std::set<Predicate> declared;
  for (const auto& p : frame.all_predicates()) declared.insert(p);
  for (const auto& p : program.auxiliary) declared.insert(p);
  std::set<Predicate> learnable(frame.targets.begin(), frame.targets.end());
  learnable.insert(program.auxiliary.begin(), program.auxiliary.end());
  for (const Clause& c : background()) {
    if (!declared.count(c.head().predicate)) throw ValidationError("undeclared predicate in " + c.to_string());
    if (learnable.count(c.head().predicate)) {
      throw ValidationError("background clause defines learnable predicate: " + c.to_string());
    }
    for (const Atom& a : c.body()) {
      if (!declared.count(a.predicate)) throw ValidationError("undeclared predicate in " + c.to_string());
    }
  }
}

PolicyConfig simdial_policy_config() {
  PolicyConfig c;
  c.frame.targets = simdial_system_predicates();
  c.frame.extensional = simdial_state_predicates();
  for (Predicate p : {Predicate{"all", 1}, Predicate{"pred1", 2}, Predicate{"member", 2}, Predicate{"member_usr", 1}}) {
    c.frame.extensional.push_back(std::move(p));
  }
  c.libraries = {{"all", {{"true", "known"}}}, {"member", {}}};

  ProgramTemplate& pt = c.program;
  pt.forward_steps = 16;
  pt.auxiliary = {{"pred2", 0}, {"pred3", 1}};
  pt.predicates = {
      {{"sys_request", 1}, {{0, false}}},
      {{"sys_inform", 1}, {{0, false}}},
      {{"sys_query", 1}, {{0, true}, {0, true}}},
      {{"pred2", 0}, {{1, false}}},
      {{"pred3", 1}, {{0, true}}},
  };
  return c;
}

std::vector<LabeledSample> simdial_samples(const std::vector<Dialog>& dialogs) {
  std::vector<LabeledSample> out;
  for (std::size_t d = 0; d < dialogs.size(); ++d) {
    const Dialog& dialog = dialogs[d];
    for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
      const Turn& turn = dialog.turns[t];
      out.push_back(LabeledSample{static_cast<int>(d), static_cast<int>(t), dialog.domain.name, turn.correction,
                                  build_sample(turn, dialog.domain)});
    }
  }
  return out;
}

std::vector<LabeledSample> multiwoz_samples(const std::vector<AnnotatedDialog>& dialogs) {
  std::vector<LabeledSample> out;
  for (std::size_t d = 0; d < dialogs.size(); ++d) {
    for (DomainSample& s : convert_multiwoz(dialogs[d])) {
      out.push_back(LabeledSample{static_cast<int>(d), s.turn, s.domain, false, std::move(s.built)});
    }
  }
  return out;
}

TrainedModel train_policy(const PolicyConfig& config, const std::vector<LabeledSample>& samples,
                          const Hyperparams& hp) {
  config.validate();
  Problem problem;
  problem.frame = config.frame;
  problem.background = config.background();
  for (const LabeledSample& s : samples) {
    if (s.built.trainable) problem.samples.push_back(s.built.sample);
  }
  if (problem.samples.empty()) throw ValidationError("no trainable samples");
  return train(problem, config.program, hp);
}

std::vector<Prediction> predict(const CrispProgram& program, const std::vector<LabeledSample>& samples) {
  std::vector<Prediction> out(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const LabeledSample& s = samples[static_cast<std::size_t>(i)];
    try {
      out[static_cast<std::size_t>(i)] =
          Prediction{s.dialog, s.turn, s.domain, decode_actions(program.predict(s.built.sample))};
    } catch (...) {
#pragma omp critical(dilog_predict_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

MetricsReport score_predictions(const std::vector<Prediction>& predicted, const std::vector<LabeledSample>& gold) {
  using Key = std::tuple<int, int, std::string>;
  std::map<Key, const Prediction*> by_key;
  for (const Prediction& p : predicted) {
    if (!by_key.emplace(Key{p.dialog, p.turn, p.domain}, &p).second) {
      throw ValidationError("duplicate prediction for dialog " + std::to_string(p.dialog) + " turn " +
                            std::to_string(p.turn));
    }
  }
  std::vector<ScoredTurn> turns;
  turns.reserve(gold.size());
  for (const LabeledSample& g : gold) {
    auto it = by_key.find(Key{g.dialog, g.turn, g.domain});
    if (it == by_key.end()) {
      throw ValidationError("no prediction for dialog " + std::to_string(g.dialog) + " turn " + std::to_string(g.turn));
    }
    turns.push_back(ScoredTurn{g.domain, it->second->acts, decode_actions(g.built.sample.positive)});
    by_key.erase(it);
  }
  if (!by_key.empty()) throw ValidationError("prediction without a gold turn");
  return score(turns);
}

}  // namespace dilog
