#include "dilog/infer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dilog/error.hpp"
#include "kernels.hpp"

namespace dilog {

std::string to_string(Amalgamation a) { return a == Amalgamation::Max ? "max" : "sum"; }

Amalgamation parse_amalgamation(std::string_view s) {
  if (s == "max") return Amalgamation::Max;
  if (s == "sum" || s == "probabilistic_sum") return Amalgamation::ProbabilisticSum;
  throw ValidationError("unknown amalgamation '" + std::string(s) + "'");
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::None: return "none";
    case Regularizer::L1: return "l1";
    case Regularizer::L2: return "l2";
  }
  return "none";
}

Regularizer parse_regularizer(std::string_view s) {
  if (s == "none") return Regularizer::None;
  if (s == "l1") return Regularizer::L1;
  if (s == "l2") return Regularizer::L2;
  throw ValidationError("unknown regularizer '" + std::string(s) + "'");
}

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (training_steps < 0) throw ValidationError("training_steps must be non-negative");
  if (!(reg_lambda >= 0.0)) throw ValidationError("reg_lambda must be non-negative");
  if (!(init_scale >= 0.0)) throw ValidationError("init_scale must be non-negative");
  if (restarts < 1) throw ValidationError("restarts must be at least 1");
}

void Sample::validate(const std::vector<Predicate>& targets) const {
  std::set<std::string> consts(constants.begin(), constants.end());
  if (consts.size() != constants.size()) throw ValidationError("sample constants contain duplicates");
  auto check_ground = [&](const Atom& a) {
    for (const Term& t : a.args) {
      if (t.is_variable()) throw ValidationError("sample atom " + a.to_string() + " is not ground");
      if (consts.count(t.name()) == 0) {
        throw ValidationError("sample atom " + a.to_string() + " uses constant outside the sample's constant list");
      }
    }
  };
  auto is_target = [&](const Atom& a) {
    return std::find(targets.begin(), targets.end(), a.predicate) != targets.end();
  };
  for (const Atom& a : background) check_ground(a);
  for (const auto* labels : {&positive, &negative}) {
    for (const Atom& a : *labels) {
      check_ground(a);
      if (!is_target(a)) throw ValidationError("labelled atom " + a.to_string() + " is not a target predicate");
    }
  }
  std::set<Atom> pos(positive.begin(), positive.end());
  for (const Atom& a : negative) {
    if (pos.count(a) != 0) throw ValidationError("atom " + a.to_string() + " is both positive and negative");
  }
}

std::vector<Predicate> ModelSpec::predicates() const {
  std::vector<Predicate> out = frame.targets;
  out.insert(out.end(), auxiliary.begin(), auxiliary.end());
  out.insert(out.end(), frame.extensional.begin(), frame.extensional.end());
  return out;
}

std::size_t ModelSpec::clause_count() const {
  std::size_t n = 0;
  for (const auto& s : slots) n += s.clauses.size();
  return n;
}

ModelSpec build_model_spec(const ProgramTemplate& pt, const LanguageFrame& frame, std::vector<Clause> background,
                           const SpecOptions& options) {
  frame.validate();
  pt.validate();
  ModelSpec spec;
  spec.frame = frame;
  spec.auxiliary = pt.auxiliary;
  spec.forward_steps = pt.forward_steps;
  spec.amalgamation = options.amalgamation;

  const std::vector<Predicate> all = spec.predicates();
  std::set<std::string> names;
  for (const auto& p : all) {
    if (!names.insert(p.name).second) throw ValidationError("predicate " + p.name + " declared twice");
  }
  auto declared = [&](const Predicate& p) { return std::find(all.begin(), all.end(), p) != all.end(); };

  std::set<Predicate> learnable;
  for (const auto& ps : pt.predicates) {
    const bool is_target = std::find(frame.targets.begin(), frame.targets.end(), ps.predicate) != frame.targets.end();
    const bool is_aux = std::find(pt.auxiliary.begin(), pt.auxiliary.end(), ps.predicate) != pt.auxiliary.end();
    if (!is_target && !is_aux) {
      throw ValidationError("slot predicate " + ps.predicate.to_string() + " is neither a target nor auxiliary");
    }
    learnable.insert(ps.predicate);
  }

  const PredicatePool pool = PredicatePool::from(frame, pt.auxiliary);
  std::size_t total = 0;
  for (const auto& ps : pt.predicates) {
    for (const auto& rule : ps.slots) {
      SlotClauses slot{ps.predicate, rule, generate_clauses(ps.predicate, rule, pool)};
      total += slot.clauses.size();
      spec.slots.push_back(std::move(slot));
    }
  }
  if (total > options.clause_budget) {
    throw ValidationError("template generates " + std::to_string(total) + " candidate clauses, over the budget of " +
                          std::to_string(options.clause_budget) + "; try fewer extra variables (lower v)");
  }

  for (const Clause& c : background) {
    for (const Atom* a : {&c.head(), &c.body()[0], &c.body()[1]}) {
      if (!declared(a->predicate)) {
        throw ValidationError("background clause " + c.to_string() + " uses undeclared predicate " +
                              a->predicate.to_string());
      }
    }
    if (learnable.count(c.head().predicate) != 0) {
      throw ValidationError("background clause " + c.to_string() + " defines a learnable predicate");
    }
  }
  spec.background = std::move(background);
  return spec;
}

ClauseWeights::ClauseWeights(const ModelSpec& spec) {
  for (const auto& s : spec.slots) offsets_.push_back(offsets_.back() + s.clauses.size());
  raw_.assign(offsets_.back(), 0.0);
}

std::vector<double> ClauseWeights::probabilities() const {
  std::vector<double> out(raw_.size());
  for (std::size_t k = 0; k + 1 < offsets_.size(); ++k) {
    const std::size_t lo = offsets_[k];
    const std::size_t hi = offsets_[k + 1];
    if (lo == hi) continue;
    const double top = *std::max_element(raw_.begin() + static_cast<std::ptrdiff_t>(lo),
                                         raw_.begin() + static_cast<std::ptrdiff_t>(hi));
    double z = 0.0;
    for (std::size_t i = lo; i < hi; ++i) z += (out[i] = std::exp(raw_[i] - top));
    for (std::size_t i = lo; i < hi; ++i) out[i] /= z;
  }
  return out;
}

namespace {

GroundedClause ground_to_csr(const Clause& clause, const GroundIndex& index, std::size_t block_offset,
                             std::size_t block_size) {
  GroundedClause g;
  g.rules = ground_clause(clause, index);
  g.head_start.assign(block_size + 1, 0);
  for (const auto& r : g.rules) ++g.head_start[r.head - block_offset + 1];
  for (std::size_t h = 0; h < block_size; ++h) g.head_start[h + 1] += g.head_start[h];
  g.bodies.resize(g.rules.size());
  std::vector<std::uint32_t> fill(g.head_start.begin(), g.head_start.end() - 1);
  for (const auto& r : g.rules) g.bodies[fill[r.head - block_offset]++] = r.body;
  return g;
}

}  // namespace

CompiledModel compile(const ModelSpec& spec, const std::vector<std::string>& constants) {
  if (constants.empty()) throw ValidationError("constant list is empty");
  CompiledModel m{GroundIndex(spec.predicates(), constants), {}, {}, {}, {}, {}, spec.forward_steps,
                  spec.amalgamation};
  const GroundIndex& index = m.index;

  std::size_t weight_offset = 0;
  for (const auto& s : spec.slots) {
    const int pid = *index.predicate_id(s.predicate);
    const std::size_t off = index.block_offset(pid);
    const std::size_t size = index.block_size(pid);
    CompiledSlot cs;
    cs.weight_offset = weight_offset;
    weight_offset += s.clauses.size();
    for (const Clause& c : s.clauses) cs.clauses.push_back(ground_to_csr(c, index, off, size));
    const std::size_t slot_id = m.slots.size();
    m.slots.push_back(std::move(cs));
    if (m.learnable.empty() || m.learnable.back().offset != off) {
      m.learnable.push_back(DerivedBlock{off, size, {}});
    }
    m.learnable.back().slots.push_back(slot_id);
  }

  std::set<int> bg_heads;
  for (const Clause& c : spec.background) {
    auto rules = ground_clause(c, index);
    m.background_rules.insert(m.background_rules.end(), rules.begin(), rules.end());
    bg_heads.insert(*index.predicate_id(c.head().predicate));
  }
  for (int pid : bg_heads) m.background_heads.push_back(DerivedBlock{index.block_offset(pid), index.block_size(pid), {}});

  m.derived.assign(index.size(), false);
  for (const auto* blocks : {&m.learnable, &m.background_heads}) {
    for (const auto& b : *blocks) {
      std::fill(m.derived.begin() + static_cast<std::ptrdiff_t>(b.offset),
                m.derived.begin() + static_cast<std::ptrdiff_t>(b.offset + b.size), true);
    }
  }
  return m;
}

CompiledModel compile(const ProgramTemplate& pt, const LanguageFrame& frame, const std::vector<std::string>& constants,
                      const std::vector<Clause>& background) {
  return compile(build_model_spec(pt, frame, background), constants);
}

Valuation init_valuation(const Sample& sample, const CompiledModel& model) {
  Valuation v(model.size(), 0.0);
  for (const Atom& a : sample.background) v[model.index.at(a)] = 1.0;
  return v;
}

Valuation step(const CompiledModel& model, std::span<const double> probabilities, std::span<const double> valuation) {
  kernels::Scratch scratch(model);
  Valuation next(valuation.size());
  kernels::forward_step(model, probabilities, valuation, next, scratch);
  return next;
}

Valuation infer(const CompiledModel& model, std::span<const double> probabilities, Valuation initial,
                std::vector<Valuation>* trace) {
  kernels::Scratch scratch(model);
  Valuation next(initial.size());
  if (trace != nullptr) trace->assign(1, initial);
  for (int t = 0; t < model.forward_steps; ++t) {
    kernels::forward_step(model, probabilities, initial, next, scratch);
    std::swap(initial, next);
    if (trace != nullptr) trace->push_back(initial);
  }
  return initial;
}

Valuation infer(const CompiledModel& model, const ClauseWeights& weights, const Sample& sample) {
  return infer(model, weights.probabilities(), init_valuation(sample, model));
}

Dataset::Dataset(std::shared_ptr<const ModelSpec> spec, std::span<const Sample> samples) : spec_(std::move(spec)) {
  for (const Sample& s : samples) {
    s.validate(spec_->frame.targets);
    CompiledSample cs;
    cs.model = model_for(s.constants);
    cs.initial = init_valuation(s, *cs.model);
    for (const Atom& a : s.positive) cs.positive.push_back(static_cast<std::uint32_t>(cs.model->index.at(a)));
    for (const Atom& a : s.negative) cs.negative.push_back(static_cast<std::uint32_t>(cs.model->index.at(a)));
    samples_.push_back(std::move(cs));
  }
}

std::shared_ptr<const CompiledModel> Dataset::model_for(const std::vector<std::string>& constants) {
  auto it = cache_.find(constants);
  if (it != cache_.end()) return it->second;
  auto model = std::make_shared<const CompiledModel>(compile(*spec_, constants));
  cache_.emplace(constants, model);
  return model;
}

double loss(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp) {
  return evaluate(data, weights, hp, false).loss;
}

std::vector<double> grad(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp) {
  return evaluate(data, weights, hp, true).gradient;
}

}  // namespace dilog
