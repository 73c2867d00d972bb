#include "dilog/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

namespace dilog {

namespace {

template <typename Key>
F1Counts multiset_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold,
                         const std::function<Key(const DialogAct&)>& key) {
  std::map<Key, std::size_t> pred, ref;
  for (const auto& a : predicted) ++pred[key(a)];
  for (const auto& a : gold) ++ref[key(a)];
  F1Counts c;
  for (const auto& [k, n] : pred) {
    auto it = ref.find(k);
    const std::size_t m = it == ref.end() ? 0 : it->second;
    c.tp += std::min(n, m);
  }
  c.fp = predicted.size() - c.tp;
  c.fn = gold.size() - c.tp;
  return c;
}

MetricScore finish(const F1Counts& c, std::size_t turns) {
  MetricScore s;
  s.counts = c;
  s.f1 = c.f1();
  s.standard_error = standard_error(s.f1, turns);
  return s;
}

void add_turn(DomainMetrics& m, const ScoredTurn& t) {
  ++m.turns;
  m.intent.counts += intent_counts(t.predicted, t.gold);
  m.entity.counts += entity_counts(t.predicted, t.gold);
  m.action.counts += action_counts(t.predicted, t.gold);
}

void finalize(DomainMetrics& m) {
  m.intent = finish(m.intent.counts, m.turns);
  m.entity = finish(m.entity.counts, m.turns);
  m.action = finish(m.action.counts, m.turns);
}

}  // namespace

double F1Counts::precision() const {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double F1Counts::recall() const { return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }

double F1Counts::f1() const {
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

F1Counts intent_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold) {
  return multiset_counts<Intent>(predicted, gold, [](const DialogAct& a) { return a.intent; });
}

F1Counts entity_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold) {
  return multiset_counts<std::string>(predicted, gold, [](const DialogAct& a) { return a.slot.value_or(""); });
}

F1Counts action_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold) {
  return multiset_counts<DialogAct>(predicted, gold, [](const DialogAct& a) { return a; });
}

double standard_error(double x, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(0.0, x * (1.0 - x)) / static_cast<double>(n));
}

MetricsReport score(const std::vector<ScoredTurn>& turns) {
  MetricsReport r;
  for (const ScoredTurn& t : turns) {
    add_turn(r.overall, t);
    add_turn(r.domains[t.domain], t);
  }
  finalize(r.overall);
  for (auto& [name, m] : r.domains) finalize(m);
  return r;
}

std::string MetricsReport::summary() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %7s %16s %16s %16s\n", "domain", "turns", "intent_f1", "entity_f1",
                "action_f1");
  out += buf;
  auto row = [&](const std::string& name, const DomainMetrics& m) {
    std::snprintf(buf, sizeof buf, "%-12s %7zu %8.4f±%.4f %8.4f±%.4f %8.4f±%.4f\n", name.c_str(), m.turns, m.intent.f1,
                  m.intent.standard_error, m.entity.f1, m.entity.standard_error, m.action.f1, m.action.standard_error);
    out += buf;
  };
  for (const auto& [name, m] : domains) row(name, m);
  row("all", overall);
  return out;
}

}  // namespace dilog
