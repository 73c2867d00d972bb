#include "dilog/logic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dilog/error.hpp"

namespace dilog {

namespace {

bool is_lower_start(char c) { return (c >= 'a' && c <= 'z'); }
bool is_upper_start(char c) { return (c >= 'A' && c <= 'Z'); }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Recursive-descent reader over one line of clause syntax. Variables are
// numbered by first appearance across everything read with the same parser.
class Parser {
 public:
  Parser(std::string_view text, Signature* signature) : text_(text), signature_(signature) {}

  Atom atom() {
    skip_ws();
    const std::size_t start = pos_;
    std::string name = identifier();
    if (name.empty() || !is_lower_start(name[0])) fail("expected predicate name", start);
    skip_ws();
    expect('(');
    std::vector<Term> args;
    skip_ws();
    if (peek() == ')') {
      ++pos_;
    } else {
      while (true) {
        args.push_back(term());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
    }
    if (static_cast<int>(args.size()) > kMaxArity) fail("arity exceeds engine bound", start);
    Predicate p{std::move(name), static_cast<int>(args.size())};
    if (signature_ != nullptr) signature_->declare(p);
    return Atom(std::move(p), std::move(args));
  }

  bool consume(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect_end() {
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input", pos_);
  }

  [[noreturn]] void fail(const std::string& what, std::size_t at) const { throw ParseError(what, at); }

  std::size_t position() const { return pos_; }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term() {
    skip_ws();
    const std::size_t start = pos_;
    std::string name = identifier();
    if (name.empty()) fail("expected term", start);
    if (is_upper_start(name[0])) {
      auto [it, inserted] = variables_.try_emplace(name, static_cast<int>(variables_.size()));
      return Term::variable(it->second);
    }
    if (!is_constant_name(name)) fail("invalid constant '" + name + "'", start);
    return Term::constant(std::move(name));
  }

  std::string_view text_;
  Signature* signature_;
  std::size_t pos_ = 0;
  std::map<std::string, int> variables_;
};

Atom rename_vars(const Atom& a, const std::vector<int>& mapping) {
  std::vector<Term> args;
  args.reserve(a.args.size());
  for (const Term& t : a.args) {
    args.push_back(t.is_variable() ? Term::variable(mapping[t.var_id()]) : t);
  }
  return Atom(a.predicate, std::move(args));
}

}  // namespace

std::string Predicate::to_string() const { return name + "/" + std::to_string(arity); }

Predicate parse_predicate(std::string_view text) {
  const auto slash = text.rfind('/');
  if (slash == std::string_view::npos) throw ParseError("expected name/arity", text.size());
  std::string name(text.substr(0, slash));
  if (!is_predicate_name(name)) throw ParseError("invalid predicate name", 0);
  const std::string_view digits = text.substr(slash + 1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError("invalid arity", slash + 1);
  }
  const int arity = std::stoi(std::string(digits));
  if (arity > kMaxArity) throw ValidationError("arity of " + name + " exceeds engine bound");
  return {std::move(name), arity};
}

Term Term::variable(int id) {
  Term t;
  t.var_ = id;
  return t;
}

Term Term::constant(std::string name) {
  Term t;
  t.name_ = std::move(name);
  return t;
}

std::string Term::to_string() const { return is_variable() ? "V" + std::to_string(var_) : name_; }

std::strong_ordering Term::operator<=>(const Term& other) const {
  if (is_variable() != other.is_variable()) {
    return is_variable() ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (is_variable()) return var_ <=> other.var_;
  return name_.compare(other.name_) <=> 0;
}

Atom::Atom(Predicate p, std::vector<Term> a) : predicate(std::move(p)), args(std::move(a)) {
  if (static_cast<int>(args.size()) != predicate.arity) {
    throw ValidationError("atom " + predicate.name + " expects " + std::to_string(predicate.arity) + " arguments");
  }
}

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::string Atom::to_string() const {
  std::string out = predicate.name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i != 0) out += ", ";
    out += args[i].to_string();
  }
  return out + ")";
}

std::strong_ordering Atom::operator<=>(const Atom& other) const {
  if (auto c = predicate <=> other.predicate; c != 0) return c;
  for (std::size_t i = 0; i < args.size() && i < other.args.size(); ++i) {
    if (auto c = args[i] <=> other.args[i]; c != 0) return c;
  }
  return args.size() <=> other.args.size();
}

Atom ground_atom(std::string_view predicate, std::initializer_list<std::string_view> constants) {
  std::vector<Term> args;
  for (auto c : constants) args.push_back(Term::constant(std::string(c)));
  Predicate p{std::string(predicate), static_cast<int>(args.size())};
  return Atom(std::move(p), std::move(args));
}

Clause::Clause(Atom head, Atom first, Atom second) {
  // Head variables take ids 0..a-1 in order of appearance.
  int max_id = -1;
  for (const Atom* a : {&head, &first, &second}) {
    for (const Term& t : a->args) {
      if (t.is_variable()) max_id = std::max(max_id, t.var_id());
    }
  }
  std::vector<int> mapping(static_cast<std::size_t>(max_id + 1), -1);
  int next = 0;
  for (const Term& t : head.args) {
    if (t.is_variable() && mapping[t.var_id()] < 0) mapping[t.var_id()] = next++;
  }
  head_variable_count_ = next;

  std::set<int> body_vars;
  for (const Atom* a : {&first, &second}) {
    for (const Term& t : a->args) {
      if (t.is_variable()) body_vars.insert(t.var_id());
    }
  }
  for (const Term& t : head.args) {
    if (t.is_variable() && body_vars.count(t.var_id()) == 0) {
      throw ValidationError("unsafe clause: head variable does not occur in the body of " + head.to_string());
    }
  }
  std::vector<int> free_vars;
  for (int v : body_vars) {
    if (mapping[v] < 0) free_vars.push_back(v);
  }
  variable_count_ = next + static_cast<int>(free_vars.size());
  if (variable_count_ > kMaxClauseVariables) {
    throw ValidationError("clause uses more than " + std::to_string(kMaxClauseVariables) + " variables");
  }

  // Try every numbering of the body-only variables; keep the smallest sorted body.
  std::vector<int> perm(free_vars.size());
  std::iota(perm.begin(), perm.end(), next);
  bool have_best = false;
  do {
    for (std::size_t i = 0; i < free_vars.size(); ++i) mapping[free_vars[i]] = perm[i];
    std::array<Atom, 2> candidate{rename_vars(first, mapping), rename_vars(second, mapping)};
    if (candidate[1] < candidate[0]) std::swap(candidate[0], candidate[1]);
    if (!have_best || candidate < body_) {
      body_ = std::move(candidate);
      have_best = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  head_ = rename_vars(head, mapping);
}

std::string Clause::to_string() const {
  return head_.to_string() + " <- " + body_[0].to_string() + ", " + body_[1].to_string();
}

void Signature::declare(const Predicate& p) {
  auto [it, inserted] = arity_.try_emplace(p.name, p.arity);
  if (!inserted && it->second != p.arity) {
    throw ValidationError("predicate " + p.name + " used with arity " + std::to_string(p.arity) +
                          " but declared with arity " + std::to_string(it->second));
  }
}

std::optional<int> Signature::arity(std::string_view name) const {
  auto it = arity_.find(name);
  if (it == arity_.end()) return std::nullopt;
  return it->second;
}

Atom parse_atom(std::string_view text, Signature* signature) {
  Parser parser(text, signature);
  Atom a = parser.atom();
  parser.expect_end();
  return a;
}

Clause parse_clause(std::string_view text, Signature* signature) {
  Parser parser(text, signature);
  Atom head = parser.atom();
  if (!parser.consume("<-")) parser.fail("expected '<-'", parser.position());
  Atom first = parser.atom();
  Atom second = first;
  if (parser.consume(",")) second = parser.atom();
  if (parser.consume(",")) throw ValidationError("clause body has more than two atoms");
  parser.expect_end();
  return Clause(std::move(head), std::move(first), std::move(second));
}

Clause rename_predicates(const Clause& c, const std::map<std::string, std::string>& renames) {
  auto rename = [&](const Atom& a) {
    Atom out = a;
    if (auto it = renames.find(a.predicate.name); it != renames.end()) out.predicate.name = it->second;
    return out;
  };
  return Clause(rename(c.head()), rename(c.body()[0]), rename(c.body()[1]));
}

bool is_predicate_name(std::string_view s) {
  if (s.empty() || !is_lower_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

bool is_constant_name(std::string_view s) {
  if (s.empty()) return false;
  if (!is_lower_start(s[0]) && !(s[0] >= '0' && s[0] <= '9')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

std::vector<Predicate> LanguageFrame::all_predicates() const {
  std::vector<Predicate> out = targets;
  out.insert(out.end(), extensional.begin(), extensional.end());
  return out;
}

void LanguageFrame::validate() const {
  std::set<std::string> seen;
  for (const Predicate& p : all_predicates()) {
    if (!is_predicate_name(p.name)) throw ValidationError("invalid predicate name '" + p.name + "'");
    if (p.arity < 0 || p.arity > kMaxArity) throw ValidationError("arity out of range for " + p.name);
    if (!seen.insert(p.name).second) {
      throw ValidationError("predicate " + p.name + " declared twice (targets and extensional must be disjoint)");
    }
  }
  for (const auto& c : constants) {
    if (!is_constant_name(c)) throw ValidationError("invalid constant '" + c + "'");
  }
}

GroundIndex::GroundIndex(std::vector<Predicate> predicates, std::vector<std::string> constants)
    : predicates_(std::move(predicates)), constants_(std::move(constants)) {
  for (std::size_t i = 0; i < constants_.size(); ++i) {
    if (!constant_lookup_.emplace(constants_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate constant '" + constants_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    if (!predicate_lookup_.emplace(predicates_[i].name, static_cast<int>(i)).second) {
      throw ValidationError("duplicate predicate '" + predicates_[i].name + "'");
    }
    offsets_.push_back(size_);
    block_sizes_.push_back(ipow(constants_.size(), predicates_[i].arity));
    size_ += block_sizes_.back();
  }
}

std::optional<int> GroundIndex::predicate_id(const Predicate& p) const {
  auto it = predicate_lookup_.find(p.name);
  if (it == predicate_lookup_.end() || predicates_[it->second].arity != p.arity) return std::nullopt;
  return it->second;
}

std::optional<int> GroundIndex::constant_id(std::string_view name) const {
  auto it = constant_lookup_.find(std::string(name));
  if (it == constant_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t GroundIndex::index_of(int predicate_id, std::span<const int> constant_ids) const {
  std::size_t local = 0;
  for (int c : constant_ids) local = local * constants_.size() + static_cast<std::size_t>(c);
  return offsets_[predicate_id] + local;
}

std::optional<std::size_t> GroundIndex::find(const Atom& atom) const {
  auto pid = predicate_id(atom.predicate);
  if (!pid) return std::nullopt;
  std::array<int, kMaxArity> ids{};
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (atom.args[i].is_variable()) return std::nullopt;
    auto cid = constant_id(atom.args[i].name());
    if (!cid) return std::nullopt;
    ids[i] = *cid;
  }
  return index_of(*pid, std::span<const int>(ids.data(), atom.args.size()));
}

std::size_t GroundIndex::at(const Atom& atom) const {
  auto i = find(atom);
  if (!i) throw ValidationError("atom " + atom.to_string() + " is not in the ground index");
  return *i;
}

Atom GroundIndex::atom(std::size_t i) const {
  if (i == 0 || i >= size_) throw std::out_of_range("ground atom index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
  const auto pid = static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);
  std::size_t local = i - offsets_[pid];
  const Predicate& p = predicates_[pid];
  std::vector<Term> args(static_cast<std::size_t>(p.arity));
  for (int k = p.arity - 1; k >= 0; --k) {
    args[static_cast<std::size_t>(k)] = Term::constant(constants_[local % constants_.size()]);
    local /= constants_.size();
  }
  return Atom(p, std::move(args));
}

GroundIndex build_ground_index(const LanguageFrame& frame, const std::vector<std::string>& constants) {
  if (constants.empty()) throw ValidationError("constant list is empty");
  return GroundIndex(frame.all_predicates(), constants);
}

std::vector<GroundRule> ground_clause(const Clause& clause, const GroundIndex& index) {
  const int n_vars = clause.variable_count();
  const std::size_t n_const = index.constants().size();

  struct Compiled {
    int pid;
    std::array<int, kMaxArity> slot;  // >=0 variable id, <0 encodes constant -(id+1)
    int arity;
  };
  auto compile = [&](const Atom& a) {
    auto pid = index.predicate_id(a.predicate);
    if (!pid) throw std::invalid_argument("predicate " + a.predicate.to_string() + " is not in the ground index");
    Compiled c{*pid, {}, a.predicate.arity};
    for (int k = 0; k < c.arity; ++k) {
      const Term& t = a.args[static_cast<std::size_t>(k)];
      if (t.is_variable()) {
        c.slot[k] = t.var_id();
      } else {
        auto cid = index.constant_id(t.name());
        if (!cid) throw std::invalid_argument("constant " + t.name() + " is not in the ground index");
        c.slot[k] = -(*cid + 1);
      }
    }
    return c;
  };
  const std::array<Compiled, 3> atoms{compile(clause.head()), compile(clause.body()[0]), compile(clause.body()[1])};

  const std::size_t total = ipow(n_const, n_vars);
  std::vector<GroundRule> out;
  out.reserve(total);
  std::array<int, kMaxClauseVariables> subst{};
  std::array<int, kMaxArity> ids{};
  auto resolve = [&](const Compiled& c) {
    for (int k = 0; k < c.arity; ++k) ids[k] = c.slot[k] >= 0 ? subst[c.slot[k]] : -c.slot[k] - 1;
    return static_cast<std::uint32_t>(index.index_of(c.pid, std::span<const int>(ids.data(), c.arity)));
  };
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rest = s;
    for (int v = n_vars - 1; v >= 0; --v) {
      subst[v] = static_cast<int>(rest % n_const);
      rest /= n_const;
    }
    out.push_back(GroundRule{resolve(atoms[0]), {resolve(atoms[1]), resolve(atoms[2])}});
  }
  return out;
}

}  // namespace dilog
