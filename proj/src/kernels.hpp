#pragma once

// Internal forward/backward step kernels shared by infer and evaluate.

#include <cstdint>
#include <span>
#include <vector>

#include "dilog/infer.hpp"

namespace dilog::kernels {

struct Scratch {
  explicit Scratch(const CompiledModel& model);

  std::vector<double> slot_a;   // S_1 per local head
  std::vector<double> slot_b;   // S_2 per local head
  std::vector<double> grad_a;   // dL/dS_1
  std::vector<double> grad_b;   // dL/dS_2
  std::vector<double> background;
  std::vector<std::int32_t> background_arg;
};

/// max over the groundings of `clause` with local head `h` of a[b1]*a[b2];
/// `arg` receives the winning body position (first on ties) or -1.
inline double clause_value(const GroundedClause& clause, std::size_t h, std::span<const double> a,
                           std::int32_t* arg) {
  double best = 0.0;
  std::int32_t best_arg = -1;
  for (std::uint32_t k = clause.head_start[h]; k < clause.head_start[h + 1]; ++k) {
    const auto& b = clause.bodies[k];
    const double v = a[b[0]] * a[b[1]];
    if (best_arg < 0 || v > best) {
      best = v;
      best_arg = static_cast<std::int32_t>(k);
    }
  }
  if (arg != nullptr) *arg = best_arg;
  return best;
}

/// Writes a_{t+1} into `next` and records invariant checks.
void forward_step(const CompiledModel& model, std::span<const double> probs, std::span<const double> cur,
                  std::span<double> next, Scratch& scratch);

/// Given dL/da_{t+1}, accumulates dL/dprob into `grad_probs` and writes
/// dL/da_t into `grad_cur`.
void backward_step(const CompiledModel& model, std::span<const double> probs, std::span<const double> cur,
                   std::span<const double> grad_next, std::span<double> grad_cur, std::span<double> grad_probs,
                   Scratch& scratch);

void record_invariants(std::uint64_t steps, std::uint64_t violations);

/// Per-sample log loss on the final valuation; fills dL/da when `grad` is non-empty.
double sample_loss(const CompiledSample& sample, std::span<const double> final_valuation, std::span<double> grad);

/// Softmax backward plus regularizer; turns dL/dprob into dL/dw and adds the penalty to `loss`.
void finish_gradient(const ClauseWeights& weights, std::span<const double> probs, const Hyperparams& hp,
                     std::vector<double>& grad_probs, double& loss, bool with_gradient);

}  // namespace dilog::kernels
