#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"

#include "dilog/clause_gen.hpp"
#include "dilog/error.hpp"

using namespace dilog;

namespace {

// Body atom as (predicate name, variable ids).
using RawAtom = std::pair<std::string, std::vector<int>>;

std::string raw_string(const RawAtom& a) {
  std::string s = a.first + "(";
  for (std::size_t i = 0; i < a.second.size(); ++i) s += (i ? "," : "") + std::to_string(a.second[i]);
  return s + ")";
}

// Canonical key of `head <- a, b` for a head over variables 0..h-1: the
// smallest sorted body text over every relabelling of the other variables.
std::string class_key(int h, int n, RawAtom a, RawAtom b) {
  std::vector<int> perm(static_cast<std::size_t>(n - h));
  std::iota(perm.begin(), perm.end(), h);
  std::string best;
  bool first = true;
  do {
    auto relabel = [&](RawAtom x) {
      for (int& v : x.second) v = v < h ? v : perm[static_cast<std::size_t>(v - h)];
      return raw_string(x);
    };
    std::string s0 = relabel(a), s1 = relabel(b);
    if (s1 < s0) std::swap(s0, s1);
    const std::string k = s0 + "&" + s1;
    if (first || k < best) best = k;
    first = false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

RawAtom raw(const Atom& a) {
  RawAtom r{a.predicate.name, {}};
  for (const auto& t : a.args) r.second.push_back(t.var_id());
  return r;
}

// Equivalence classes of safe, non-tautological two-atom bodies, found by
// brute force over every pair of variable tuples.
std::set<std::string> oracle_classes(const Predicate& head, const RuleTemplate& t, const PredicatePool& pool) {
  const int h = head.arity, n = head.arity + t.extra_variables;
  std::vector<Predicate> preds = pool.extensional;
  if (t.allow_intensional) preds.insert(preds.end(), pool.intensional.begin(), pool.intensional.end());
  std::vector<RawAtom> atoms;
  for (const auto& p : preds) {
    if (n == 0 && p.arity > 0) continue;
    std::vector<int> args(static_cast<std::size_t>(p.arity), 0);
    while (true) {
      atoms.push_back({p.name, args});
      int k = p.arity - 1;
      while (k >= 0 && ++args[static_cast<std::size_t>(k)] == n) args[static_cast<std::size_t>(k--)] = 0;
      if (k < 0) break;
    }
  }
  RawAtom head_atom{head.name, {}};
  for (int v = 0; v < h; ++v) head_atom.second.push_back(v);
  std::set<std::string> classes;
  for (const auto& a : atoms) {
    for (const auto& b : atoms) {
      if (a == head_atom || b == head_atom) continue;
      bool safe = true;
      for (int v = 0; v < h; ++v) {
        auto has = [&](const RawAtom& x) { return std::find(x.second.begin(), x.second.end(), v) != x.second.end(); };
        safe = safe && (has(a) || has(b));
      }
      if (safe) classes.insert(class_key(h, n, a, b));
    }
  }
  return classes;
}

}  // namespace

TEST_CASE("p over q and r: three clauses") {
  PredicatePool pool;
  pool.extensional = {{"q", 1}, {"r", 1}};
  const auto clauses = generate_clauses({"p", 1}, {0, true}, pool);
  const std::set<Clause> expected{parse_clause("p(X) <- q(X), q(X)"), parse_clause("p(X) <- r(X), r(X)"),
                                  parse_clause("p(X) <- q(X), r(X)")};
  CHECK(std::set<Clause>(clauses.begin(), clauses.end()) == expected);
  CHECK(clauses.size() == 3);
}

TEST_CASE("empty pool gives no clauses") {
  PredicatePool pool;
  pool.intensional = {{"p", 1}};
  CHECK(generate_clauses({"p", 1}, {0, false}, pool).empty());
  ProgramTemplate pt;
  pt.predicates = {{{"p", 1}, {{0, false}}}};
  LanguageFrame frame;
  frame.targets = {{"p", 1}};
  CHECK(template_complexity(pt, frame) == 0);
}

TEST_CASE("list-property pool contains the recursive clause") {
  PredicatePool pool;
  pool.extensional = {{"true", 1}, {"succ", 2}, {"terminal", 1}};
  pool.intensional = {{"pred1", 2}, {"all", 1}};
  const auto clauses = generate_clauses({"all", 1}, {1, true}, pool);
  CHECK(std::count(clauses.begin(), clauses.end(), parse_clause("all(V0) <- true(V0), pred1(V0, V1)")) == 1);
  const auto p1 = generate_clauses({"pred1", 2}, {0, true}, pool);
  CHECK(std::count(p1.begin(), p1.end(), parse_clause("pred1(V0, V1) <- succ(V0, V1), all(V1)")) == 1);
  CHECK(std::count(p1.begin(), p1.end(), parse_clause("pred1(V0, V1) <- succ(V0, V1), terminal(V1)")) == 1);
}

TEST_CASE("generated pools match the brute-force class count") {
  const std::vector<PredicatePool> pools = {
      {{{"q", 1}, {"r", 1}}, {{"p", 1}}},
      {{{"true", 1}, {"succ", 2}, {"terminal", 1}}, {{"all", 1}, {"pred1", 2}}},
      {{{"e", 2}, {"z", 0}}, {{"p", 1}, {"s", 0}}},
  };
  const std::vector<Predicate> heads = {{"p", 1}, {"all", 1}, {"pred1", 2}, {"s", 0}};
  for (const auto& pool : pools) {
    for (const auto& head : heads) {
      for (int v = 0; v <= kMaxExtraVariables; ++v) {
        if (head.arity + v > kMaxClauseVariables) continue;
        for (bool i : {false, true}) {
          const RuleTemplate t{v, i};
          const auto clauses = generate_clauses(head, t, pool);
          const auto classes = oracle_classes(head, t, pool);
          CAPTURE(head.to_string());
          CAPTURE(v);
          CAPTURE(i);
          CHECK(clauses.size() == classes.size());
          std::set<std::string> seen;
          for (const auto& c : clauses) {
            CHECK(c.head().predicate == head);
            CHECK(c.body()[0] != c.head());  // no tautology
            CHECK(c.body()[1] != c.head());
            const std::string k = class_key(head.arity, head.arity + v, raw(c.body()[0]), raw(c.body()[1]));
            CHECK(classes.count(k) == 1);
            CHECK(seen.insert(k).second);  // no two clauses in one class
          }
          CHECK(std::is_sorted(clauses.begin(), clauses.end()));
        }
      }
    }
  }
}

TEST_CASE("too many variables") {
  PredicatePool pool;
  pool.extensional = {{"q", 2}};
  CHECK_THROWS_AS(generate_clauses({"p", 2}, {2, false}, pool), ValidationError);
}

TEST_CASE("template complexity") {
  LanguageFrame frame;
  frame.targets = {{"p", 1}};
  frame.extensional = {{"q", 1}, {"r", 1}};
  ProgramTemplate one;
  one.predicates = {{{"p", 1}, {{0, true}}}};
  CHECK(template_complexity(one, frame) == 3);

  for (RuleTemplate t : {RuleTemplate{0, false}, RuleTemplate{1, true}, RuleTemplate{2, true}}) {
    ProgramTemplate a, b;
    a.predicates = {{{"p", 1}, {t}}};
    b.predicates = {{{"p", 1}, {t, t}}};
    const auto single = generate_clauses({"p", 1}, t, PredicatePool::from(frame, {})).size();
    CHECK(template_complexity(a, frame) == single);
    CHECK(template_complexity(b, frame) == 2 * single);
  }
}

TEST_CASE("program template validation") {
  ProgramTemplate pt;
  pt.predicates = {{{"p", 1}, {}}};
  CHECK_THROWS_AS(pt.validate(), ValidationError);
  pt.predicates = {{{"p", 1}, {{0, false}, {0, false}, {0, false}}}};
  CHECK_THROWS_AS(pt.validate(), ValidationError);
  pt.predicates = {{{"p", 1}, {{3, false}}}};
  CHECK_THROWS_AS(pt.validate(), ValidationError);
  pt.predicates = {{{"p", 1}, {{0, false}}}};
  pt.auxiliary = {{"aux", 0}};
  CHECK_THROWS_AS(pt.validate(), ValidationError);
  pt.auxiliary.clear();
  pt.forward_steps = 0;
  CHECK_THROWS_AS(pt.validate(), ValidationError);
  pt.forward_steps = 10;
  CHECK_NOTHROW(pt.validate());
}

TEST_CASE("enumerate_templates") {
  LanguageFrame frame;
  frame.targets = {{"p", 1}};
  frame.extensional = {{"q", 1}, {"r", 1}};
  TemplateGrid grid;
  grid.v_max = 1;
  const auto templates = enumerate_templates(frame, grid);
  REQUIRE(templates.size() == 4);

  std::set<std::pair<int, bool>> points;
  for (const auto& t : templates) {
    REQUIRE(t.predicates.size() == 1);
    points.insert({t.predicates[0].slots[0].extra_variables, t.predicates[0].slots[0].allow_intensional});
  }
  CHECK(points.size() == 4);
  for (std::size_t k = 1; k < templates.size(); ++k) {
    CHECK(template_complexity(templates[k - 1], frame) <= template_complexity(templates[k], frame));
  }
  std::size_t min_count = SIZE_MAX;
  for (const auto& t : templates) min_count = std::min(min_count, template_complexity(t, frame));
  CHECK(template_complexity(templates.front(), frame) == min_count);

  auto position = [&](int v, bool i) {
    for (std::size_t k = 0; k < templates.size(); ++k) {
      const auto& s = templates[k].predicates[0].slots[0];
      if (s.extra_variables == v && s.allow_intensional == i) return k;
    }
    return templates.size();
  };
  CHECK(position(0, true) < position(1, true));
}

TEST_CASE("enumerate_templates covers auxiliary and slot options once each") {
  LanguageFrame frame;
  frame.targets = {{"p", 1}};
  frame.extensional = {{"q", 1}};
  TemplateGrid grid;
  grid.v_max = 0;
  grid.slot_counts = {1, 2};
  grid.max_auxiliary = 1;
  grid.auxiliary_arities = {0, 1};
  const auto templates = enumerate_templates(frame, grid);
  // No auxiliary: 2 rule options x 2 slot counts. One auxiliary of arity 0 or 1: (2 x 2)^2 each.
  CHECK(templates.size() == 4 + 16 + 16);
  std::set<std::string> keys;
  for (const auto& t : templates) keys.insert(t.serialize());
  CHECK(keys.size() == templates.size());
}
