#pragma once

// Micro-averaged multiset F1 over per-turn dialog acts.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dilog/dialog.hpp"

namespace dilog {

struct F1Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  F1Counts& operator+=(const F1Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const F1Counts&) const = default;

  double precision() const;
  double recall() const;
  /// 2PR/(P+R); 1 when nothing was predicted or expected.
  double f1() const;
};

/// Per-turn counts; matching is by multiset intersection.
F1Counts intent_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold);
F1Counts entity_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold);
F1Counts action_counts(const std::vector<DialogAct>& predicted, const std::vector<DialogAct>& gold);

/// sqrt(x(1-x)/n); 0 for n = 0.
double standard_error(double x, std::size_t n);

struct MetricScore {
  F1Counts counts;
  double f1 = 1.0;
  double standard_error = 0.0;
};

struct DomainMetrics {
  std::size_t turns = 0;
  MetricScore intent, entity, action;
};

struct MetricsReport {
  DomainMetrics overall;
  std::map<std::string, DomainMetrics> domains;

  /// Short human-readable table.
  std::string summary() const;
};

struct ScoredTurn {
  std::string domain;
  std::vector<DialogAct> predicted;
  std::vector<DialogAct> gold;
};

/// Aggregates integer counts, so the result does not depend on turn order.
/// Standard errors use the number of scored turns as N.
MetricsReport score(const std::vector<ScoredTurn>& turns);

}  // namespace dilog
