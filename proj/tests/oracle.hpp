#pragma once

// Independent test oracles. Nothing here goes through GroundIndex,
// ground_clause or the inference kernels.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dilog/logic.hpp"

namespace oracle {

/// Ground atom as "name/c1,c2,...".
inline std::string key(const std::string& name, const std::vector<std::string>& args) {
  std::string k = name + "/";
  for (std::size_t i = 0; i < args.size(); ++i) k += (i ? "," : "") + args[i];
  return k;
}

inline std::string key(const dilog::Atom& a) {
  std::vector<std::string> args;
  for (const auto& t : a.args) args.push_back(t.name());
  return key(a.predicate.name, args);
}

using Facts = std::set<std::string>;

inline Facts facts_of(const std::vector<dilog::Atom>& atoms) {
  Facts f;
  for (const auto& a : atoms) f.insert(key(a));
  return f;
}

/// Synchronous boolean forward chaining: each of `steps` rounds adds the
/// heads of every clause instance whose body holds in the previous round.
inline Facts forward_chain(const std::vector<dilog::Clause>& clauses, Facts facts,
                           const std::vector<std::string>& constants, int steps) {
  auto instantiate = [](const dilog::Atom& a, const std::vector<std::string>& sub) {
    std::vector<std::string> args;
    for (const auto& t : a.args) args.push_back(t.is_variable() ? sub[t.var_id()] : t.name());
    return key(a.predicate.name, args);
  };
  for (int s = 0; s < steps; ++s) {
    Facts next = facts;
    for (const auto& c : clauses) {
      const int n = c.variable_count();
      std::vector<std::size_t> odo(n, 0);
      std::vector<std::string> sub(n);
      while (true) {
        for (int v = 0; v < n; ++v) sub[v] = constants[odo[v]];
        if (facts.count(instantiate(c.body()[0], sub)) && facts.count(instantiate(c.body()[1], sub))) {
          next.insert(instantiate(c.head(), sub));
        }
        int v = n - 1;
        while (v >= 0 && ++odo[v] == constants.size()) odo[v--] = 0;
        if (v < 0) break;
      }
    }
    if (next == facts) break;
    facts = std::move(next);
  }
  return facts;
}

/// Central difference of f along coordinate j.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t j, double h) {
  const double x0 = x[j];
  x[j] = x0 + h;
  const double plus = f(x);
  x[j] = x0 - h;
  const double minus = f(x);
  return (plus - minus) / (2.0 * h);
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

/// Largest number of predicted/gold pairs with equal keys, found by trying
/// every injective assignment of predicted items to gold items.
inline Counts best_pairing(const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
  std::vector<bool> used(gold.size(), false);
  std::function<std::size_t(std::size_t)> search = [&](std::size_t i) -> std::size_t {
    if (i == predicted.size()) return 0;
    std::size_t best = search(i + 1);
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (used[g] || gold[g] != predicted[i]) continue;
      used[g] = true;
      best = std::max(best, 1 + search(i + 1));
      used[g] = false;
    }
    return best;
  };
  Counts c;
  c.tp = search(0);
  c.fp = predicted.size() - c.tp;
  c.fn = gold.size() - c.tp;
  return c;
}

inline double f1(const Counts& c) {
  if (c.tp + c.fp + c.fn == 0) return 1.0;
  return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
}

/// all(x) over linked lists: x is not the terminal and every node from x up
/// to the terminal has the property.
inline bool all_holds(const std::string& x, const std::map<std::string, std::string>& succ,
                      const std::set<std::string>& terminal, const std::set<std::string>& property) {
  std::string node = x;
  if (terminal.count(node)) return false;
  while (!terminal.count(node)) {
    if (!property.count(node)) return false;
    auto it = succ.find(node);
    if (it == succ.end()) return false;
    node = it->second;
  }
  return true;
}

}  // namespace oracle
