#include "dilog/extract.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "dilog/error.hpp"

namespace dilog {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_predicates(const std::vector<Predicate>& preds) {
  std::string out;
  for (const auto& p : preds) out += " " + p.to_string();
  return out;
}

ModelSpec crisp_spec(const PolicyProgram& p) {
  ModelSpec spec;
  spec.frame = p.frame;
  spec.auxiliary = p.auxiliary;
  spec.background = p.background;
  spec.forward_steps = p.forward_steps;
  spec.amalgamation = Amalgamation::Max;
  for (const ProgramEntry& e : p.entries) {
    if (!e.argmax) continue;
    spec.slots.push_back(SlotClauses{e.predicate, RuleTemplate{}, {e.clause}});
  }
  return spec;
}

}  // namespace

std::vector<Clause> PolicyProgram::rules_for(const Predicate& p) const {
  std::vector<Clause> out;
  for (const ProgramEntry& e : entries) {
    if (e.argmax && e.predicate == p) out.push_back(e.clause);
  }
  return out;
}

void PolicyProgram::validate() const {
  frame.validate();
  std::set<Predicate> known;
  for (const auto& p : frame.all_predicates()) known.insert(p);
  for (const auto& p : auxiliary) known.insert(p);
  std::set<Predicate> learnable(frame.targets.begin(), frame.targets.end());
  learnable.insert(auxiliary.begin(), auxiliary.end());

  auto check_clause = [&](const Clause& c) {
    if (!known.count(c.head().predicate)) throw ValidationError("undeclared predicate in " + c.to_string());
    for (const Atom& a : c.body()) {
      if (!known.count(a.predicate)) throw ValidationError("undeclared predicate in " + c.to_string());
    }
  };
  for (const Clause& c : background) {
    check_clause(c);
    if (learnable.count(c.head().predicate)) {
      throw ValidationError("background clause defines learnable predicate: " + c.to_string());
    }
  }
  std::map<std::pair<Predicate, int>, int> argmax_count;
  std::vector<Predicate> order;
  for (const ProgramEntry& e : entries) {
    check_clause(e.clause);
    if (!(e.clause.head().predicate == e.predicate)) {
      throw ValidationError("clause " + e.clause.to_string() + " listed under " + e.predicate.to_string());
    }
    if (!learnable.count(e.predicate)) throw ValidationError(e.predicate.to_string() + " is not learnable");
    if (e.slot < 0 || e.slot > 1) throw ValidationError("slot index must be 0 or 1");
    if (e.argmax) ++argmax_count[{e.predicate, e.slot}];
    argmax_count.try_emplace({e.predicate, e.slot}, 0);
    if (order.empty() || !(order.back() == e.predicate)) {
      if (std::find(order.begin(), order.end(), e.predicate) != order.end()) {
        throw ValidationError("entries for " + e.predicate.to_string() + " are not contiguous");
      }
      order.push_back(e.predicate);
    }
  }
  for (const auto& [key, n] : argmax_count) {
    if (n != 1) {
      throw ValidationError("slot " + std::to_string(key.second) + " of " + key.first.to_string() +
                            " needs exactly one argmax clause");
    }
  }
  for (const Predicate& p : learnable) {
    if (!argmax_count.count({p, 0})) throw ValidationError("no rule for " + p.to_string());
  }
  if (forward_steps < 1) throw ValidationError("steps must be positive");
}

PolicyProgram extract_program(const TrainedModel& model, double threshold) {
  const ModelSpec& spec = *model.spec;
  PolicyProgram out;
  out.frame = spec.frame;
  out.auxiliary = spec.auxiliary;
  out.background = spec.background;
  out.forward_steps = spec.forward_steps;

  const std::vector<double> probs = model.weights.probabilities();
  std::map<Predicate, int> seen;
  for (std::size_t k = 0; k < spec.slots.size(); ++k) {
    const SlotClauses& s = spec.slots[k];
    const int slot = seen[s.predicate]++;
    const std::size_t off = model.weights.offset(k);
    std::vector<std::size_t> order(s.clauses.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    // Highest probability first; ties keep pool order.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[off + a] > probs[off + b]; });
    for (std::size_t r = 0; r < order.size(); ++r) {
      const double p = probs[off + order[r]];
      if (r > 0 && p < threshold) break;
      out.entries.push_back(ProgramEntry{s.predicate, slot, s.clauses[order[r]], p, r == 0});
    }
  }
  return out;
}

std::string format_program(const PolicyProgram& program) {
  std::string out = "steps " + std::to_string(program.forward_steps) + "\n";
  out += "targets" + join_predicates(program.frame.targets) + "\n";
  out += "extensional" + join_predicates(program.frame.extensional) + "\n";
  if (!program.auxiliary.empty()) out += "auxiliary" + join_predicates(program.auxiliary) + "\n";
  for (const Clause& c : program.background) out += "background " + c.to_string() + "\n";
  const ProgramEntry* prev = nullptr;
  for (const ProgramEntry& e : program.entries) {
    if (prev == nullptr || !(prev->predicate == e.predicate) || prev->slot != e.slot) {
      out += "slot " + e.predicate.to_string() + " " + std::to_string(e.slot) + "\n";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", e.probability);
    out += std::string(buf) + " " + e.clause.to_string() + "\n";
    prev = &e;
  }
  return out;
}

PolicyProgram parse_program(std::string_view text) {
  PolicyProgram out;
  std::optional<std::pair<Predicate, int>> current;
  bool first_in_slot = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = trim(text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto words = split_words(line);
    const std::string& key = words[0];
    const std::string rest = trim(std::string_view(line).substr(key.size()));
    try {
      if (key == "steps") {
        out.forward_steps = std::stoi(rest);
      } else if (key == "targets" || key == "extensional" || key == "auxiliary") {
        auto& list = key == "targets" ? out.frame.targets : key == "extensional" ? out.frame.extensional : out.auxiliary;
        for (std::size_t i = 1; i < words.size(); ++i) list.push_back(parse_predicate(words[i]));
      } else if (key == "background") {
        out.background.push_back(parse_clause(rest));
      } else if (key == "slot") {
        if (words.size() != 3) throw ValidationError("expected 'slot <pred/arity> <index>'");
        current = std::make_pair(parse_predicate(words[1]), std::stoi(words[2]));
        first_in_slot = true;
      } else {
        if (!current) throw ValidationError("clause before any slot line");
        std::size_t used = 0;
        const double p = std::stod(key, &used);
        if (used != key.size()) throw ValidationError("bad probability '" + key + "'");
        out.entries.push_back(ProgramEntry{current->first, current->second, parse_clause(rest), p, first_in_slot});
        first_in_slot = false;
      }
    } catch (const ValidationError& e) {
      throw ValidationError("program line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::logic_error& e) {
      throw ValidationError("program line " + std::to_string(line_no) + ": malformed number");
    }
  }
  out.validate();
  return out;
}

CrispProgram::CrispProgram(PolicyProgram program) : program_(std::move(program)) {
  program_.validate();
  spec_ = crisp_spec(program_);
  ones_.assign(spec_.clause_count(), 1.0);
}

std::shared_ptr<const CompiledModel> CrispProgram::model_for(const std::vector<std::string>& constants) const {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(constants);
  if (it != cache_.end()) return it->second;
  auto model = std::make_shared<const CompiledModel>(compile(spec_, constants));
  cache_.emplace(constants, model);
  return model;
}

std::vector<Atom> CrispProgram::infer(const std::vector<Atom>& background,
                                      const std::vector<std::string>& constants) const {
  const auto model = model_for(constants);
  Sample s;
  s.background = background;
  s.constants = constants;
  const Valuation v = dilog::infer(*model, ones_, init_valuation(s, *model));
  std::vector<Atom> out;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > 0.5) out.push_back(model->index.atom(i));
  }
  return out;
}

std::vector<Atom> CrispProgram::predict(const Sample& sample) const {
  std::set<Predicate> targets(program_.frame.targets.begin(), program_.frame.targets.end());
  std::vector<Atom> out;
  for (Atom& a : infer(sample.background, sample.constants)) {
    if (targets.count(a.predicate)) out.push_back(std::move(a));
  }
  return out;
}

std::size_t CrispProgram::errors(const Sample& sample) const {
  const auto truth = infer(sample.background, sample.constants);
  const std::set<Atom> derived(truth.begin(), truth.end());
  std::size_t n = 0;
  for (const Atom& a : sample.positive) n += derived.count(a) ? 0 : 1;
  for (const Atom& a : sample.negative) n += derived.count(a) ? 1 : 0;
  return n;
}

double agreement(const CrispProgram& program, const std::vector<Sample>& samples) {
  std::size_t total = 0, wrong = 0;
  for (const Sample& s : samples) {
    total += s.positive.size() + s.negative.size();
    wrong += program.errors(s);
  }
  return total == 0 ? 1.0 : 1.0 - static_cast<double>(wrong) / static_cast<double>(total);
}

}  // namespace dilog
