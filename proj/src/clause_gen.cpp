#include "dilog/clause_gen.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "dilog/error.hpp"

namespace dilog {

namespace {

void append_atoms(const Predicate& p, int n_vars, std::vector<Atom>& out) {
  std::size_t combos = 1;
  for (int k = 0; k < p.arity; ++k) combos *= static_cast<std::size_t>(n_vars);
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<Term> args(static_cast<std::size_t>(p.arity));
    std::size_t rest = c;
    for (int k = p.arity - 1; k >= 0; --k) {
      args[static_cast<std::size_t>(k)] = Term::variable(static_cast<int>(rest % static_cast<std::size_t>(n_vars)));
      rest /= static_cast<std::size_t>(n_vars);
    }
    out.emplace_back(p, std::move(args));
  }
}

bool covers_head(const Atom& head, const Atom& a, const Atom& b) {
  for (const Term& t : head.args) {
    auto uses = [&](const Atom& x) { return std::find(x.args.begin(), x.args.end(), t) != x.args.end(); };
    if (!uses(a) && !uses(b)) return false;
  }
  return true;
}

std::string rule_template_string(const RuleTemplate& r) {
  return "v" + std::to_string(r.extra_variables) + "i" + (r.allow_intensional ? "1" : "0");
}

}  // namespace

std::string ProgramTemplate::serialize() const {
  std::string out = "T" + std::to_string(forward_steps) + ";aux[";
  for (std::size_t i = 0; i < auxiliary.size(); ++i) {
    if (i != 0) out += ",";
    out += auxiliary[i].to_string();
  }
  out += "]";
  for (const auto& ps : predicates) {
    out += ";" + ps.predicate.to_string() + ":";
    for (std::size_t i = 0; i < ps.slots.size(); ++i) {
      if (i != 0) out += ",";
      out += rule_template_string(ps.slots[i]);
    }
  }
  return out;
}

void ProgramTemplate::validate() const {
  if (forward_steps < 1) throw ValidationError("forward_steps must be positive");
  std::set<std::string> names;
  for (const auto& ps : predicates) {
    if (!names.insert(ps.predicate.name).second) {
      throw ValidationError("predicate " + ps.predicate.name + " has two slot entries");
    }
    if (ps.slots.empty() || ps.slots.size() > 2) {
      throw ValidationError("predicate " + ps.predicate.name + " needs one or two slots");
    }
    for (const auto& s : ps.slots) {
      if (s.extra_variables < 0 || s.extra_variables > kMaxExtraVariables) {
        throw ValidationError("extra variable count out of range for " + ps.predicate.name);
      }
    }
  }
  for (const auto& a : auxiliary) {
    if (names.count(a.name) == 0) throw ValidationError("auxiliary predicate " + a.name + " has no slots");
  }
}

PredicatePool PredicatePool::from(const LanguageFrame& frame, const std::vector<Predicate>& auxiliary) {
  PredicatePool pool;
  pool.extensional = frame.extensional;
  pool.intensional = frame.targets;
  pool.intensional.insert(pool.intensional.end(), auxiliary.begin(), auxiliary.end());
  return pool;
}

std::vector<Clause> generate_clauses(const Predicate& head, const RuleTemplate& tmpl, const PredicatePool& pool) {
  const int n_vars = head.arity + tmpl.extra_variables;
  if (n_vars > kMaxClauseVariables) {
    throw ValidationError("template for " + head.name + " needs " + std::to_string(n_vars) +
                          " variables; the engine bound is " + std::to_string(kMaxClauseVariables));
  }
  std::vector<Term> head_args;
  for (int k = 0; k < head.arity; ++k) head_args.push_back(Term::variable(k));
  const Atom head_atom(head, std::move(head_args));

  std::vector<Atom> atoms;
  for (const auto& p : pool.extensional) append_atoms(p, n_vars, atoms);
  if (tmpl.allow_intensional) {
    for (const auto& p : pool.intensional) append_atoms(p, n_vars, atoms);
  }
  std::erase(atoms, head_atom);

  std::set<Clause> unique;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i; j < atoms.size(); ++j) {
      if (!covers_head(head_atom, atoms[i], atoms[j])) continue;
      unique.emplace(head_atom, atoms[i], atoms[j]);
    }
  }
  return {unique.begin(), unique.end()};
}

std::size_t template_complexity(const ProgramTemplate& pt, const LanguageFrame& frame) {
  const PredicatePool pool = PredicatePool::from(frame, pt.auxiliary);
  std::size_t total = 0;
  for (const auto& ps : pt.predicates) {
    for (const auto& slot : ps.slots) total += generate_clauses(ps.predicate, slot, pool).size();
  }
  return total;
}

std::vector<ProgramTemplate> enumerate_templates(const LanguageFrame& frame, const TemplateGrid& grid) {
  std::vector<RuleTemplate> rule_options;
  for (int v = 0; v <= grid.v_max; ++v) {
    for (bool i : {false, true}) rule_options.push_back({v, i});
  }

  // Auxiliary arity multisets of size 0..max_auxiliary, named pred1, pred2, ...
  std::vector<std::vector<Predicate>> aux_options{{}};
  std::vector<int> arities = grid.auxiliary_arities;
  std::sort(arities.begin(), arities.end());
  arities.erase(std::unique(arities.begin(), arities.end()), arities.end());
  for (int m = 1; m <= grid.max_auxiliary; ++m) {
    std::vector<std::size_t> pick(static_cast<std::size_t>(m), 0);
    while (true) {
      std::vector<Predicate> aux;
      for (int k = 0; k < m; ++k) aux.push_back({"pred" + std::to_string(k + 1), arities[pick[static_cast<std::size_t>(k)]]});
      aux_options.push_back(std::move(aux));
      // next non-decreasing index tuple
      int k = m - 1;
      while (k >= 0 && pick[static_cast<std::size_t>(k)] + 1 == arities.size()) --k;
      if (k < 0) break;
      ++pick[static_cast<std::size_t>(k)];
      for (int r = k + 1; r < m; ++r) pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(k)];
    }
  }

  std::vector<std::pair<std::size_t, ProgramTemplate>> scored;
  for (const auto& aux : aux_options) {
    std::vector<Predicate> learnable = frame.targets;
    learnable.insert(learnable.end(), aux.begin(), aux.end());
    // Mixed-radix counter over (rule option, slot count) per learnable predicate.
    const std::size_t radix = rule_options.size() * grid.slot_counts.size();
    std::vector<std::size_t> digit(learnable.size(), 0);
    while (true) {
      ProgramTemplate pt;
      pt.auxiliary = aux;
      pt.forward_steps = grid.forward_steps;
      bool representable = true;
      for (std::size_t p = 0; p < learnable.size(); ++p) {
        const RuleTemplate& r = rule_options[digit[p] % rule_options.size()];
        const int count = grid.slot_counts[digit[p] / rule_options.size()];
        if (learnable[p].arity + r.extra_variables > kMaxClauseVariables) representable = false;
        pt.predicates.push_back({learnable[p], std::vector<RuleTemplate>(static_cast<std::size_t>(count), r)});
      }
      if (representable) {
        const std::size_t c = template_complexity(pt, frame);
        scored.emplace_back(c, std::move(pt));
      }
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == radix) digit[k++] = 0;
      if (k == digit.size()) break;
    }
  }
  std::vector<std::pair<std::size_t, std::string>> keys;
  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    order[i] = i;
    keys.emplace_back(scored[i].first, scored[i].second.serialize());
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<ProgramTemplate> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(std::move(scored[i].second));
  return out;
}

}  // namespace dilog
