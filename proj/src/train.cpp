#include "dilog/train.hpp"

#include <cmath>
#include <random>
#include <set>

#include "dilog/error.hpp"

namespace dilog {

namespace {

constexpr double kRmsDecay = 0.9;
constexpr double kRmsEpsilon = 1e-8;

ClauseWeights initial_weights(const ModelSpec& spec, const Hyperparams& hp, std::uint64_t seed) {
  ClauseWeights w(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& x : w.raw()) x = hp.init_scale * normal(rng);
  return w;
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  // splitmix64 step keeps restarts decorrelated from neighbouring seeds
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrainedModel run_once(const Dataset& data, const ProgramTemplate& pt, const Hyperparams& hp, int restart) {
  TrainedModel out;
  out.spec = data.spec_ptr();
  out.program_template = pt;
  out.hyperparams = hp;
  out.restart = restart;
  out.weights = initial_weights(data.spec(), hp, restart == 0 ? hp.seed : restart_seed(hp.seed, restart));

  std::vector<double> cache(out.weights.size(), 0.0);
  out.loss_trace.reserve(static_cast<std::size_t>(hp.training_steps) + 1);
  for (int step = 0; step < hp.training_steps; ++step) {
    const Objective obj = evaluate(data, out.weights, hp, true);
    if (!std::isfinite(obj.loss)) throw DivergenceError("training loss became non-finite", step);
    out.loss_trace.push_back(obj.loss);
    auto& w = out.weights.raw();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double g = obj.gradient[j];
      cache[j] = kRmsDecay * cache[j] + (1.0 - kRmsDecay) * g * g;
      w[j] -= hp.learning_rate * g / (std::sqrt(cache[j]) + kRmsEpsilon);
    }
  }
  const double final_loss = evaluate(data, out.weights, hp, false).loss;
  if (!std::isfinite(final_loss)) throw DivergenceError("training loss became non-finite", hp.training_steps);
  out.loss_trace.push_back(final_loss);
  return out;
}

}  // namespace

TrainedModel train(Dataset& data, const ProgramTemplate& pt, const Hyperparams& hp) {
  hp.validate();
  if (data.samples().empty()) throw ValidationError("training needs at least one sample");
  TrainedModel best = run_once(data, pt, hp, 0);
  for (int r = 1; r < hp.restarts; ++r) {
    TrainedModel candidate = run_once(data, pt, hp, r);
    if (candidate.loss_trace.back() < best.loss_trace.back()) best = std::move(candidate);
  }
  return best;
}

TrainedModel train(const Problem& problem, const ProgramTemplate& pt, const Hyperparams& hp) {
  SpecOptions options;
  options.amalgamation = hp.amalgamation;
  auto spec = std::make_shared<const ModelSpec>(build_model_spec(pt, problem.frame, problem.background, options));
  Dataset data(spec, problem.samples);
  return train(data, pt, hp);
}

int first_step_below(const std::vector<double>& trace, double threshold) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i] < threshold) return static_cast<int>(i);
  }
  return -1;
}

std::vector<Clause> background_library(std::string_view name) {
  std::vector<std::string_view> text;
  if (name == "all") {
    text = {
        "pred1(V0, V1) <- succ(V0, V1), all(V1)",
        "pred1(V0, V1) <- succ(V0, V1), terminal(V1)",
        "all(V0) <- true(V0), pred1(V0, V1)",
    };
  } else if (name == "member") {
    // member(X, L): X follows L in the succ chain and is not the terminal node.
    text = {
        "member(V0, V1) <- succ(V1, V0), succ(V0, V2)",
        "member(V0, V1) <- succ(V1, V2), member(V0, V2)",
        "member_usr(V0) <- usr_slots(V1), member(V0, V1)",
    };
  } else {
    throw ValidationError("unknown background library '" + std::string(name) + "'");
  }
  std::vector<Clause> out;
  for (auto t : text) out.push_back(parse_clause(t));
  return out;
}

std::vector<Predicate> background_library_predicates(std::string_view name) {
  std::set<Predicate> preds;
  for (const Clause& c : background_library(name)) {
    preds.insert(c.head().predicate);
    for (const Atom& a : c.body()) preds.insert(a.predicate);
  }
  return {preds.begin(), preds.end()};
}

}  // namespace dilog
