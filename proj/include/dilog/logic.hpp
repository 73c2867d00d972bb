#pragma once

// Terms, atoms and two-atom-body clauses, their textual syntax, and the
// ground-atom index that every valuation vector is laid out against.
//
// Syntax:
//   atom    := name '(' [term {',' term}] ')'
//   clause  := atom '<-' atom [',' atom]
//   term    := Variable | constant
// Predicate names and constants are lowercase identifiers; any identifier
// starting with an uppercase letter is a variable. Variables print as V0, V1, ...

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dilog {

inline constexpr int kMaxArity = 3;
inline constexpr int kMaxClauseVariables = 3;

struct Predicate {
  std::string name;
  int arity = 0;

  auto operator<=>(const Predicate&) const = default;
  bool operator==(const Predicate&) const = default;

  /// "name/arity"
  std::string to_string() const;
};

/// Parses "name/arity".
Predicate parse_predicate(std::string_view text);

class Term {
 public:
  static Term variable(int id);
  static Term constant(std::string name);

  bool is_variable() const noexcept { return var_ >= 0; }
  int var_id() const noexcept { return var_; }
  const std::string& name() const noexcept { return name_; }
  std::string to_string() const;

  // Variables sort before constants.
  std::strong_ordering operator<=>(const Term& other) const;
  bool operator==(const Term& other) const = default;

 private:
  int var_ = -1;
  std::string name_;
};

struct Atom {
  Predicate predicate;
  std::vector<Term> args;

  Atom() = default;
  Atom(Predicate p, std::vector<Term> a);

  bool is_ground() const;
  std::string to_string() const;

  std::strong_ordering operator<=>(const Atom& other) const;
  bool operator==(const Atom& other) const = default;
};

/// Builds a ground atom from a predicate name and constant names.
Atom ground_atom(std::string_view predicate, std::initializer_list<std::string_view> constants);

/// A safe clause `head <- body[0], body[1]` in canonical form: head variables
/// are numbered first in order of appearance, remaining variables are numbered
/// to minimise the sorted body, and the body is sorted.
class Clause {
 public:
  /// Canonicalises and validates. Throws ValidationError when a head variable
  /// is missing from the body or more than kMaxClauseVariables are used.
  Clause(Atom head, Atom first, Atom second);

  const Atom& head() const noexcept { return head_; }
  const std::array<Atom, 2>& body() const noexcept { return body_; }

  /// Number of distinct variables; they are numbered 0..n-1.
  int variable_count() const noexcept { return variable_count_; }
  /// Number of distinct variables in the head.
  int head_variable_count() const noexcept { return head_variable_count_; }

  std::string to_string() const;

  auto operator<=>(const Clause& other) const {
    if (auto c = head_ <=> other.head_; c != 0) return c;
    return body_ <=> other.body_;
  }
  bool operator==(const Clause& other) const = default;

 private:
  Atom head_;
  std::array<Atom, 2> body_;
  int variable_count_ = 0;
  int head_variable_count_ = 0;
};

/// Predicate arities seen so far; rejects a name reused at a different arity.
class Signature {
 public:
  void declare(const Predicate& p);
  std::optional<int> arity(std::string_view name) const;

 private:
  std::map<std::string, int, std::less<>> arity_;
};

Atom parse_atom(std::string_view text, Signature* signature = nullptr);
Clause parse_clause(std::string_view text, Signature* signature = nullptr);

inline std::string format_atom(const Atom& a) { return a.to_string(); }
inline std::string format_clause(const Clause& c) { return c.to_string(); }

/// Renames every occurrence of a predicate name, keeping arity.
Clause rename_predicates(const Clause& c, const std::map<std::string, std::string>& renames);

struct LanguageFrame {
  std::vector<Predicate> targets;
  std::vector<Predicate> extensional;
  std::vector<std::string> constants;

  /// Targets then extensional predicates, in declaration order.
  std::vector<Predicate> all_predicates() const;
  /// Throws ValidationError on overlap, duplicates or bad names.
  void validate() const;
};

bool is_predicate_name(std::string_view s);
bool is_constant_name(std::string_view s);

/// Dense numbering of every ground atom over a constant list.
/// Index 0 is a sentinel atom that is never true; predicate blocks follow in
/// declaration order with argument tuples in lexicographic order of constant
/// positions.
class GroundIndex {
 public:
  GroundIndex(std::vector<Predicate> predicates, std::vector<std::string> constants);

  std::size_t size() const noexcept { return size_; }
  const std::vector<std::string>& constants() const noexcept { return constants_; }
  const std::vector<Predicate>& predicates() const noexcept { return predicates_; }

  std::optional<int> predicate_id(const Predicate& p) const;
  std::optional<int> constant_id(std::string_view name) const;
  std::size_t block_offset(int predicate_id) const { return offsets_[predicate_id]; }
  std::size_t block_size(int predicate_id) const { return block_sizes_[predicate_id]; }

  /// Index of a ground atom, or nullopt if its predicate or a constant is unknown.
  std::optional<std::size_t> find(const Atom& atom) const;
  /// Like find but throws ValidationError.
  std::size_t at(const Atom& atom) const;
  /// Index from predicate id and constant ids.
  std::size_t index_of(int predicate_id, std::span<const int> constant_ids) const;
  /// Inverse of find for i in [1, size()).
  Atom atom(std::size_t i) const;

 private:
  std::vector<Predicate> predicates_;
  std::vector<std::string> constants_;
  std::unordered_map<std::string, int> predicate_lookup_;
  std::unordered_map<std::string, int> constant_lookup_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> block_sizes_;
  std::size_t size_ = 1;
};

/// Throws ValidationError when constants is empty or has duplicates.
GroundIndex build_ground_index(const LanguageFrame& frame, const std::vector<std::string>& constants);

struct GroundRule {
  std::uint32_t head;
  std::array<std::uint32_t, 2> body;

  bool operator==(const GroundRule&) const = default;
};

/// One entry per substitution of the clause variables by constants, in
/// lexicographic substitution order. Throws std::invalid_argument if a clause
/// predicate is missing from the index.
std::vector<GroundRule> ground_clause(const Clause& clause, const GroundIndex& index);

}  // namespace dilog
