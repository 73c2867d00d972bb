#include "kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>

#include "dilog/error.hpp"

namespace dilog {

namespace {

std::atomic<std::uint64_t> g_steps_checked{0};
std::atomic<std::uint64_t> g_violations{0};

std::size_t max_block(const CompiledModel& m) {
  std::size_t n = 0;
  for (const auto& b : m.learnable) n = std::max(n, b.size);
  return n;
}

inline double amalgamate(Amalgamation mode, double old, double derived) {
  if (mode == Amalgamation::Max) return old >= derived ? old : derived;
  return old + derived * (1.0 - old);
}

// S_k over a block for one slot.
void slot_values(const CompiledSlot& slot, std::size_t block_size, std::span<const double> probs,
                 std::span<const double> a, double* out) {
  std::fill(out, out + block_size, 0.0);
  for (std::size_t c = 0; c < slot.clauses.size(); ++c) {
    const double p = probs[slot.weight_offset + c];
    if (p == 0.0) continue;
    const GroundedClause& clause = slot.clauses[c];
    for (std::size_t h = 0; h < block_size; ++h) {
      if (clause.head_start[h] == clause.head_start[h + 1]) continue;
      out[h] += p * kernels::clause_value(clause, h, a, nullptr);
    }
  }
}

}  // namespace

InvariantCounters invariant_counters() { return {g_steps_checked.load(), g_violations.load()}; }

void reset_invariant_counters() {
  g_steps_checked = 0;
  g_violations = 0;
}

namespace kernels {

Scratch::Scratch(const CompiledModel& model)
    : slot_a(max_block(model)),
      slot_b(max_block(model)),
      grad_a(max_block(model)),
      grad_b(max_block(model)),
      background(model.size()),
      background_arg(model.size()) {}

void record_invariants(std::uint64_t steps, std::uint64_t violations) {
  g_steps_checked.fetch_add(steps, std::memory_order_relaxed);
  if (violations != 0) g_violations.fetch_add(violations, std::memory_order_relaxed);
}

void forward_step(const CompiledModel& model, std::span<const double> probs, std::span<const double> cur,
                  std::span<double> next, Scratch& scratch) {
  std::copy(cur.begin(), cur.end(), next.begin());
  for (const DerivedBlock& block : model.learnable) {
    double* s1 = scratch.slot_a.data();
    double* s2 = scratch.slot_b.data();
    slot_values(model.slots[block.slots[0]], block.size, probs, cur, s1);
    const bool two = block.slots.size() > 1;
    if (two) slot_values(model.slots[block.slots[1]], block.size, probs, cur, s2);
    for (std::size_t h = 0; h < block.size; ++h) {
      double d = two ? s1[h] + s2[h] - s1[h] * s2[h] : s1[h];
      d = std::clamp(d, 0.0, 1.0);
      next[block.offset + h] = amalgamate(model.amalgamation, cur[block.offset + h], d);
    }
  }
  if (!model.background_rules.empty()) {
    auto& bg = scratch.background;
    for (const DerivedBlock& block : model.background_heads) {
      std::fill(bg.begin() + static_cast<std::ptrdiff_t>(block.offset),
                bg.begin() + static_cast<std::ptrdiff_t>(block.offset + block.size), 0.0);
    }
    for (const GroundRule& r : model.background_rules) {
      const double v = cur[r.body[0]] * cur[r.body[1]];
      if (v > bg[r.head]) bg[r.head] = v;
    }
    for (const DerivedBlock& block : model.background_heads) {
      for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
        next[i] = amalgamate(model.amalgamation, cur[i], bg[i]);
      }
    }
  }
  next[0] = 0.0;

  std::uint64_t violations = 0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double v = next[i];
    if (!(v >= cur[i]) || !(v >= 0.0) || !(v <= 1.0)) ++violations;
  }
  record_invariants(1, violations);
}

void backward_step(const CompiledModel& model, std::span<const double> probs, std::span<const double> cur,
                   std::span<const double> grad_next, std::span<double> grad_cur, std::span<double> grad_probs,
                   Scratch& scratch) {
  const Amalgamation mode = model.amalgamation;
  for (std::size_t i = 0; i < cur.size(); ++i) grad_cur[i] = model.derived[i] ? 0.0 : grad_next[i];
  grad_cur[0] = 0.0;

  for (const DerivedBlock& block : model.learnable) {
    double* s1 = scratch.slot_a.data();
    double* s2 = scratch.slot_b.data();
    double* g1 = scratch.grad_a.data();
    double* g2 = scratch.grad_b.data();
    slot_values(model.slots[block.slots[0]], block.size, probs, cur, s1);
    const bool two = block.slots.size() > 1;
    if (two) slot_values(model.slots[block.slots[1]], block.size, probs, cur, s2);

    for (std::size_t h = 0; h < block.size; ++h) {
      const std::size_t i = block.offset + h;
      const double raw = two ? s1[h] + s2[h] - s1[h] * s2[h] : s1[h];
      const double d = std::clamp(raw, 0.0, 1.0);
      const double old = cur[i];
      double g_d = 0.0;
      if (mode == Amalgamation::Max) {
        if (old >= d) {
          grad_cur[i] += grad_next[i];
        } else {
          g_d = grad_next[i];
        }
      } else {
        grad_cur[i] += grad_next[i] * (1.0 - d);
        g_d = grad_next[i] * (1.0 - old);
      }
      if (two) {
        g1[h] = g_d * (1.0 - s2[h]);
        g2[h] = g_d * (1.0 - s1[h]);
      } else {
        g1[h] = g_d;
      }
    }

    for (std::size_t k = 0; k < block.slots.size(); ++k) {
      const CompiledSlot& slot = model.slots[block.slots[k]];
      const double* g_slot = k == 0 ? g1 : g2;
      for (std::size_t c = 0; c < slot.clauses.size(); ++c) {
        const GroundedClause& clause = slot.clauses[c];
        const double p = probs[slot.weight_offset + c];
        double g_prob = 0.0;
        for (std::size_t h = 0; h < block.size; ++h) {
          if (clause.head_start[h] == clause.head_start[h + 1]) continue;
          std::int32_t arg = -1;
          const double f = clause_value(clause, h, cur, &arg);
          g_prob += g_slot[h] * f;
          const double g_f = g_slot[h] * p;
          if (g_f != 0.0 && arg >= 0) {
            const auto& b = clause.bodies[static_cast<std::size_t>(arg)];
            grad_cur[b[0]] += g_f * cur[b[1]];
            grad_cur[b[1]] += g_f * cur[b[0]];
          }
        }
        grad_probs[slot.weight_offset + c] += g_prob;
      }
    }
  }

  if (!model.background_rules.empty()) {
    auto& bg = scratch.background;
    auto& arg = scratch.background_arg;
    for (const DerivedBlock& block : model.background_heads) {
      for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
        bg[i] = 0.0;
        arg[i] = -1;
      }
    }
    for (std::size_t r = 0; r < model.background_rules.size(); ++r) {
      const GroundRule& rule = model.background_rules[r];
      const double v = cur[rule.body[0]] * cur[rule.body[1]];
      if (arg[rule.head] < 0 || v > bg[rule.head]) {
        bg[rule.head] = v;
        arg[rule.head] = static_cast<std::int32_t>(r);
      }
    }
    for (const DerivedBlock& block : model.background_heads) {
      for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
        double g_d = 0.0;
        if (mode == Amalgamation::Max) {
          if (cur[i] >= bg[i]) {
            grad_cur[i] += grad_next[i];
          } else {
            g_d = grad_next[i];
          }
        } else {
          grad_cur[i] += grad_next[i] * (1.0 - bg[i]);
          g_d = grad_next[i] * (1.0 - cur[i]);
        }
        if (g_d != 0.0 && arg[i] >= 0) {
          const GroundRule& rule = model.background_rules[static_cast<std::size_t>(arg[i])];
          grad_cur[rule.body[0]] += g_d * cur[rule.body[1]];
          grad_cur[rule.body[1]] += g_d * cur[rule.body[0]];
        }
      }
    }
  }
  grad_cur[0] = 0.0;
}

double sample_loss(const CompiledSample& sample, std::span<const double> a, std::span<double> grad) {
  if (sample.positive.empty() && sample.negative.empty()) return 0.0;
  const double n = static_cast<double>(sample.positive.size() + sample.negative.size());
  const bool want = !grad.empty();
  double total = 0.0;
  for (std::uint32_t i : sample.positive) {
    const double v = std::clamp(a[i], kLogEpsilon, 1.0 - kLogEpsilon);
    total -= std::log(v);
    if (want && a[i] > kLogEpsilon && a[i] < 1.0 - kLogEpsilon) grad[i] -= 1.0 / (v * n);
  }
  for (std::uint32_t i : sample.negative) {
    const double v = std::clamp(a[i], kLogEpsilon, 1.0 - kLogEpsilon);
    total -= std::log(1.0 - v);
    if (want && a[i] > kLogEpsilon && a[i] < 1.0 - kLogEpsilon) grad[i] += 1.0 / ((1.0 - v) * n);
  }
  return total / n;
}

void finish_gradient(const ClauseWeights& weights, std::span<const double> probs, const Hyperparams& hp,
                     std::vector<double>& grad_probs, double& loss, bool with_gradient) {
  const auto& w = weights.raw();
  double penalty = 0.0;
  if (hp.regularizer == Regularizer::L1) {
    for (double x : w) penalty += std::abs(x);
  } else if (hp.regularizer == Regularizer::L2) {
    for (double x : w) penalty += x * x;
  }
  loss += hp.reg_lambda * penalty;
  if (!with_gradient) return;

  std::vector<double> g(w.size(), 0.0);
  for (std::size_t k = 0; k < weights.slot_count(); ++k) {
    const std::size_t lo = weights.offset(k);
    const std::size_t hi = lo + weights.slot(k).size();
    double dot = 0.0;
    for (std::size_t j = lo; j < hi; ++j) dot += probs[j] * grad_probs[j];
    for (std::size_t j = lo; j < hi; ++j) g[j] = probs[j] * (grad_probs[j] - dot);
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (hp.regularizer == Regularizer::L1) {
      g[j] += hp.reg_lambda * (w[j] > 0.0 ? 1.0 : (w[j] < 0.0 ? -1.0 : 0.0));
    } else if (hp.regularizer == Regularizer::L2) {
      g[j] += 2.0 * hp.reg_lambda * w[j];
    }
  }
  grad_probs = std::move(g);
}

}  // namespace kernels

Objective evaluate(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp, bool with_gradient) {
  const std::vector<double> probs = weights.probabilities();
  const auto& samples = data.samples();
  const auto n = static_cast<std::ptrdiff_t>(samples.size());

  std::vector<double> losses(samples.size(), 0.0);
  std::vector<std::vector<double>> grads(with_gradient ? samples.size() : 0);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const CompiledSample& s = samples[static_cast<std::size_t>(i)];
    const CompiledModel& model = *s.model;
    kernels::Scratch scratch(model);
    const int steps = model.forward_steps;
    std::vector<Valuation> trace(static_cast<std::size_t>(steps) + 1);
    trace[0] = s.initial;
    for (int t = 0; t < steps; ++t) {
      trace[static_cast<std::size_t>(t) + 1].resize(model.size());
      kernels::forward_step(model, probs, trace[static_cast<std::size_t>(t)], trace[static_cast<std::size_t>(t) + 1],
                            scratch);
    }
    if (!with_gradient) {
      losses[static_cast<std::size_t>(i)] = kernels::sample_loss(s, trace.back(), {});
      continue;
    }
    std::vector<double> g_next(model.size(), 0.0);
    std::vector<double> g_cur(model.size(), 0.0);
    losses[static_cast<std::size_t>(i)] = kernels::sample_loss(s, trace.back(), g_next);
    std::vector<double>& g_probs = grads[static_cast<std::size_t>(i)];
    g_probs.assign(probs.size(), 0.0);
    for (int t = steps - 1; t >= 0; --t) {
      kernels::backward_step(model, probs, trace[static_cast<std::size_t>(t)], g_next, g_cur, g_probs, scratch);
      std::swap(g_next, g_cur);
    }
  }

  Objective out;
  const double inv = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());
  for (double l : losses) out.loss += l;
  out.loss *= inv;
  std::vector<double> g_probs(probs.size(), 0.0);
  if (with_gradient) {
    for (const auto& g : grads) {
      for (std::size_t j = 0; j < g.size(); ++j) g_probs[j] += g[j];
    }
    for (double& x : g_probs) x *= inv;
  }
  kernels::finish_gradient(weights, probs, hp, g_probs, out.loss, with_gradient);
  if (with_gradient) out.gradient = std::move(g_probs);
  return out;
}

}  // namespace dilog
