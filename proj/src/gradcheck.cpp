#include "dilog/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dilog/error.hpp"
#include "dilog/simulator.hpp"

namespace dilog {

namespace {

std::string constant_name(int i) { return "c" + std::to_string(i); }

}  // namespace

GradcheckInstance random_instance(std::uint64_t seed, const GradcheckOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  LanguageFrame frame;
  frame.targets = {{"t", 1}};
  frame.extensional = {{"a", 1}, {"b", 1}, {"e", 2}};

  ProgramTemplate pt;
  pt.forward_steps = uniform(1, 4);
  const bool with_aux = coin(0.5);
  if (with_aux) pt.auxiliary = {{"q", 1}};
  PredicateSlots target{{"t", 1}, {}};
  const int target_slots = uniform(1, 2);
  for (int k = 0; k < target_slots; ++k) target.slots.push_back({uniform(0, 1), coin(0.5)});
  pt.predicates.push_back(target);
  if (with_aux) pt.predicates.push_back({{"q", 1}, {{0, coin(0.5)}}});

  std::vector<Clause> background;
  if (coin(0.3)) background.push_back(parse_clause("e(X, Y) <- e(X, Z), e(Z, Y)"));

  SpecOptions so;
  so.amalgamation = coin(0.5) ? Amalgamation::Max : Amalgamation::ProbabilisticSum;
  ModelSpec spec = build_model_spec(pt, frame, background, so);

  // Keep at most max_clauses candidates, at least one per slot.
  std::vector<std::size_t> keep(spec.slots.size(), 1);
  int budget = options.max_clauses - static_cast<int>(spec.slots.size());
  for (std::size_t k = 0; k < spec.slots.size(); ++k) {
    std::shuffle(spec.slots[k].clauses.begin(), spec.slots[k].clauses.end(), rng);
    const int extra = std::min<int>(budget, static_cast<int>(spec.slots[k].clauses.size()) - 1);
    const int take = extra > 0 ? uniform(0, extra) : 0;
    keep[k] += static_cast<std::size_t>(take);
    budget -= take;
  }
  for (std::size_t k = 0; k < spec.slots.size(); ++k) {
    auto& c = spec.slots[k].clauses;
    c.erase(c.begin() + static_cast<std::ptrdiff_t>(keep[k]), c.end());
  }

  GradcheckInstance out;
  out.spec = std::make_shared<const ModelSpec>(std::move(spec));

  const int n_samples = uniform(1, 2);
  for (int s = 0; s < n_samples; ++s) {
    Sample sample;
    const int n_const = uniform(1, options.max_constants);
    for (int i = 0; i < n_const; ++i) sample.constants.push_back(constant_name(i));
    for (const auto& c : sample.constants) {
      if (coin(0.5)) sample.background.push_back(ground_atom("a", {c}));
      if (coin(0.5)) sample.background.push_back(ground_atom("b", {c}));
      for (const auto& d : sample.constants) {
        if (coin(0.3)) sample.background.push_back(ground_atom("e", {c, d}));
      }
    }
    for (const auto& c : sample.constants) {
      const int label = uniform(0, 2);
      if (label == 1) sample.positive.push_back(ground_atom("t", {c}));
      if (label == 2) sample.negative.push_back(ground_atom("t", {c}));
    }
    if (sample.positive.empty() && sample.negative.empty()) sample.positive.push_back(ground_atom("t", {"c0"}));
    out.samples.push_back(std::move(sample));
  }

  out.weights = ClauseWeights(*out.spec);
  std::normal_distribution<double> normal(0.0, 1.5);
  for (double& w : out.weights.raw()) w = normal(rng);

  out.hyperparams.amalgamation = out.spec->amalgamation;
  const int reg = uniform(0, 2);
  out.hyperparams.regularizer = reg == 0 ? Regularizer::None : reg == 1 ? Regularizer::L1 : Regularizer::L2;
  out.hyperparams.reg_lambda = reg == 0 ? 0.0 : 0.01;
  return out;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  if (options.instances < 1) throw ValidationError("gradcheck needs at least one instance");
  if (!(options.step > 0.0)) throw ValidationError("gradcheck step must be positive");
  GradcheckReport report;
  const double h = options.step;
  for (std::uint64_t i = 0; report.checked < options.instances; ++i) {
    if (i > static_cast<std::uint64_t>(options.instances) * 20) {
      throw ValidationError("too few smooth gradcheck instances");
    }
    GradcheckInstance inst = random_instance(derive_seed(options.seed, i), options);
    Dataset data(inst.spec, inst.samples);
    const Objective obj = evaluate(data, inst.weights, inst.hyperparams, true);
    const Objective ref = reference::evaluate(data, inst.weights, inst.hyperparams, true);

    ClauseWeights probe = inst.weights;
    auto f = [&](std::size_t j, double delta) {
      probe.raw()[j] = inst.weights.raw()[j] + delta;
      const double v = loss(data, probe, inst.hyperparams);
      probe.raw()[j] = inst.weights.raw()[j];
      return v;
    };
    bool smooth = true;
    double worst = 0.0, worst_ref = 0.0;
    for (std::size_t j = 0; j < inst.weights.size() && smooth; ++j) {
      const double plus = f(j, h), minus = f(j, -h);
      const double forward = (plus - obj.loss) / h, backward = (obj.loss - minus) / h;
      if (std::abs(forward - backward) > 1e-2 * std::max({std::abs(forward), std::abs(backward), 1e-3})) {
        smooth = false;
        break;
      }
      const double fd = (plus - minus) / (2.0 * h);
      const double g = obj.gradient[j];
      worst = std::max(worst, std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), options.floor}));
      worst_ref = std::max(worst_ref, std::abs(g - ref.gradient[j]));
    }
    if (!smooth) {
      ++report.nonsmooth;
      continue;
    }
    ++report.checked;
    report.coordinates += inst.weights.size();
    report.max_relative_error = std::max(report.max_relative_error, worst);
    report.max_reference_difference = std::max(report.max_reference_difference, worst_ref);
  }
  return report;
}

}  // namespace dilog
