#include <map>
#include <memory>
#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "dilog/pipeline.hpp"
#include "dilog/simulator.hpp"

using namespace dilog;

namespace {

struct Fixture {
  std::unique_ptr<Dataset> data;
  ClauseWeights weights;
  Hyperparams hp;
};

// SimDial restaurant samples over the full policy template.
const Fixture& fixture(int dialogs) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(dialogs);
  if (it != cache.end()) return it->second;
  const PolicyConfig config = simdial_policy_config();
  auto spec = std::make_shared<const ModelSpec>(build_model_spec(config.program, config.frame, config.background()));
  std::vector<Sample> samples;
  for (const auto& s : simdial_samples(generate_corpus(builtin_domain("restaurant"), dialogs, 0))) {
    samples.push_back(s.built.sample);
  }
  Fixture f;
  f.data = std::make_unique<Dataset>(spec, samples);
  f.weights = ClauseWeights(*spec);
  std::mt19937_64 rng(0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& w : f.weights.raw()) w = n(rng);
  return cache.emplace(dialogs, std::move(f)).first->second;
}

void BM_EvaluateReference(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate(*f.data, f.weights, f.hp, true));
  state.counters["samples"] = static_cast<double>(f.data->samples().size());
}

void BM_EvaluateOpenMP(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(*f.data, f.weights, f.hp, true));
  state.counters["samples"] = static_cast<double>(f.data->samples().size());
}

void BM_StepReference(benchmark::State& state) {
  const Fixture& f = fixture(1);
  const CompiledSample& s = f.data->samples().front();
  const auto probs = f.weights.probabilities();
  for (auto _ : state) benchmark::DoNotOptimize(reference::step(*s.model, probs, s.initial));
}

void BM_StepKernel(benchmark::State& state) {
  const Fixture& f = fixture(1);
  const CompiledSample& s = f.data->samples().front();
  const auto probs = f.weights.probabilities();
  for (auto _ : state) benchmark::DoNotOptimize(step(*s.model, probs, s.initial));
}

}  // namespace

BENCHMARK(BM_EvaluateReference)->Arg(1)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateOpenMP)->Args({1, 1})->Args({20, 1})->Args({20, 2})->Args({20, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StepReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StepKernel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
