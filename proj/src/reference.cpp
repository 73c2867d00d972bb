// Serial reference kernels. Written directly from the step definition over
// flat grounding lists, without the CSR layout, scratch reuse or threading of
// the main kernels.

#include <algorithm>
#include <map>

#include "dilog/infer.hpp"
#include "kernels.hpp"

namespace dilog::reference {

namespace {

struct Best {
  double value = 0.0;
  GroundRule rule{};
};

// head -> (max body product, first winning grounding)
std::map<std::uint32_t, Best> best_by_head(const std::vector<GroundRule>& rules, std::span<const double> a) {
  std::map<std::uint32_t, Best> out;
  for (const GroundRule& r : rules) {
    const double v = a[r.body[0]] * a[r.body[1]];
    auto [it, inserted] = out.try_emplace(r.head, Best{v, r});
    if (!inserted && v > it->second.value) it->second = Best{v, r};
  }
  return out;
}

struct Derivation {
  std::map<std::uint32_t, double> learned;                // D per learnable head atom
  std::map<std::uint32_t, std::vector<double>> slot_sums;  // per head, S per slot of its predicate
  std::map<std::uint32_t, Best> background;
};

Derivation derive(const CompiledModel& model, std::span<const double> probs, std::span<const double> a) {
  Derivation d;
  for (const DerivedBlock& block : model.learnable) {
    for (std::size_t h = 0; h < block.size; ++h) d.slot_sums[static_cast<std::uint32_t>(block.offset + h)].assign(block.slots.size(), 0.0);
    for (std::size_t k = 0; k < block.slots.size(); ++k) {
      const CompiledSlot& slot = model.slots[block.slots[k]];
      for (std::size_t c = 0; c < slot.clauses.size(); ++c) {
        const double p = probs[slot.weight_offset + c];
        for (const auto& [head, best] : best_by_head(slot.clauses[c].rules, a)) d.slot_sums[head][k] += p * best.value;
      }
    }
    for (std::size_t h = 0; h < block.size; ++h) {
      const auto head = static_cast<std::uint32_t>(block.offset + h);
      const auto& s = d.slot_sums[head];
      const double v = s.size() == 2 ? 1.0 - (1.0 - s[0]) * (1.0 - s[1]) : s[0];
      d.learned[head] = std::clamp(v, 0.0, 1.0);
    }
  }
  d.background = best_by_head(model.background_rules, a);
  return d;
}

double combine(Amalgamation mode, double old, double derived) {
  return mode == Amalgamation::Max ? std::max(old, derived) : 1.0 - (1.0 - old) * (1.0 - derived);
}

}  // namespace

Valuation step(const CompiledModel& model, std::span<const double> probs, std::span<const double> valuation) {
  const Derivation d = derive(model, probs, valuation);
  Valuation next(valuation.begin(), valuation.end());
  for (const auto& [head, v] : d.learned) next[head] = combine(model.amalgamation, valuation[head], v);
  for (const DerivedBlock& block : model.background_heads) {
    for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
      auto it = d.background.find(static_cast<std::uint32_t>(i));
      const double v = it == d.background.end() ? 0.0 : it->second.value;
      next[i] = combine(model.amalgamation, valuation[i], v);
    }
  }
  next[0] = 0.0;
  return next;
}

Objective evaluate(const Dataset& data, const ClauseWeights& weights, const Hyperparams& hp, bool with_gradient) {
  const std::vector<double> probs = weights.probabilities();
  Objective out;
  std::vector<double> g_probs(probs.size(), 0.0);
  const double inv = data.samples().empty() ? 0.0 : 1.0 / static_cast<double>(data.samples().size());

  for (const CompiledSample& s : data.samples()) {
    const CompiledModel& model = *s.model;
    std::vector<Valuation> trace{s.initial};
    for (int t = 0; t < model.forward_steps; ++t) trace.push_back(reference::step(model, probs, trace.back()));

    std::vector<double> g(model.size(), 0.0);
    out.loss += inv * kernels::sample_loss(s, trace.back(), with_gradient ? std::span<double>(g) : std::span<double>());
    if (!with_gradient) continue;

    for (int t = model.forward_steps - 1; t >= 0; --t) {
      const Valuation& a = trace[static_cast<std::size_t>(t)];
      const Derivation d = derive(model, probs, a);
      std::vector<double> g_prev(model.size(), 0.0);
      for (std::size_t i = 1; i < model.size(); ++i) {
        if (!model.derived[i]) g_prev[i] += g[i];
      }
      // Learnable heads: amalgamation, slot combination, clause mixture, chosen grounding.
      for (const DerivedBlock& block : model.learnable) {
        std::vector<std::vector<double>> g_slot(block.slots.size(), std::vector<double>(block.size, 0.0));
        for (std::size_t h = 0; h < block.size; ++h) {
          const auto head = static_cast<std::uint32_t>(block.offset + h);
          const double dv = d.learned.at(head);
          double g_d = 0.0;
          if (model.amalgamation == Amalgamation::Max) {
            (a[head] >= dv ? g_prev[head] : g_d) += g[head];
          } else {
            g_prev[head] += g[head] * (1.0 - dv);
            g_d = g[head] * (1.0 - a[head]);
          }
          const auto& sums = d.slot_sums.at(head);
          for (std::size_t k = 0; k < block.slots.size(); ++k) {
            g_slot[k][h] = sums.size() == 2 ? g_d * (1.0 - sums[1 - k]) : g_d;
          }
        }
        for (std::size_t k = 0; k < block.slots.size(); ++k) {
          const CompiledSlot& slot = model.slots[block.slots[k]];
          for (std::size_t c = 0; c < slot.clauses.size(); ++c) {
            const double p = probs[slot.weight_offset + c];
            for (const auto& [head, best] : best_by_head(slot.clauses[c].rules, a)) {
              const double g_s = g_slot[k][head - block.offset];
              g_probs[slot.weight_offset + c] += inv * g_s * best.value;
              g_prev[best.rule.body[0]] += g_s * p * a[best.rule.body[1]];
              g_prev[best.rule.body[1]] += g_s * p * a[best.rule.body[0]];
            }
          }
        }
      }
      for (const DerivedBlock& block : model.background_heads) {
        for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
          auto it = d.background.find(static_cast<std::uint32_t>(i));
          const double dv = it == d.background.end() ? 0.0 : it->second.value;
          double g_d = 0.0;
          if (model.amalgamation == Amalgamation::Max) {
            (a[i] >= dv ? g_prev[i] : g_d) += g[i];
          } else {
            g_prev[i] += g[i] * (1.0 - dv);
            g_d = g[i] * (1.0 - a[i]);
          }
          if (it != d.background.end()) {
            const GroundRule& r = it->second.rule;
            g_prev[r.body[0]] += g_d * a[r.body[1]];
            g_prev[r.body[1]] += g_d * a[r.body[0]];
          }
        }
      }
      g_prev[0] = 0.0;
      g = std::move(g_prev);
    }
  }
  kernels::finish_gradient(weights, probs, hp, g_probs, out.loss, with_gradient);
  if (with_gradient) out.gradient = std::move(g_probs);
  return out;
}

}  // namespace dilog::reference
