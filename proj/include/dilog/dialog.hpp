#pragma once

// Delexicalised dialog turns and their logical form.
//
// A SimDial-style belief state becomes a linked list over the user slots
//   usr_slot -> s1 -> ... -> sk -> term
// plus known/unknown facts per slot, kb_return for database results and
// outdated for goals whose delivered value was invalidated by a correction.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dilog/infer.hpp"
#include "dilog/logic.hpp"

namespace dilog {

inline constexpr std::string_view kTerminalConstant = "term";
inline constexpr std::string_view kUserListConstant = "usr_slot";

struct DomainSpec {
  std::string name;
  std::vector<std::string> user_slots;
  std::vector<std::string> system_slots;

  /// Throws ValidationError on empty or duplicate slot lists, invalid names,
  /// or slots named like the structural constants.
  void validate() const;
  bool has_user_slot(std::string_view s) const;
  bool has_system_slot(std::string_view s) const;
  /// user slots, system slots, term, usr_slot
  std::vector<std::string> constants() const;
};

/// restaurant, movie, bus, weather. Throws ValidationError for other names.
DomainSpec builtin_domain(std::string_view name);
std::vector<std::string> builtin_domain_names();

struct BeliefState {
  std::set<std::string> known;      // user or system slots with a value
  std::set<std::string> kb_return;  // system slots returned by the database this turn
  std::set<std::string> outdated;   // delivered goals invalidated by a user correction
  bool no_match = false;
  bool book_fail = false;

  bool operator==(const BeliefState&) const = default;
};

enum class Intent { Inform, Request, Query, OfferBooked, NoOffer };

std::string to_string(Intent i);
Intent parse_intent(std::string_view s);

struct DialogAct {
  Intent intent = Intent::Inform;
  std::optional<std::string> slot;

  auto operator<=>(const DialogAct&) const = default;
  bool operator==(const DialogAct&) const = default;
};

enum class Side { User, System };

struct Turn {
  BeliefState state;  // after the user's acts, before the system's
  std::vector<DialogAct> user_acts;
  std::vector<DialogAct> system_acts;
  std::string domain;
  bool correction = false;  // user re-informed an already known slot

  bool operator==(const Turn&) const = default;
};

struct Dialog {
  DomainSpec domain;
  std::vector<Turn> turns;
};

/// Atom predicates emitted for system acts in SimDial conversion.
std::vector<Predicate> simdial_system_predicates();
/// Every predicate SimDial conversion can place in a background set.
std::vector<Predicate> simdial_state_predicates();

std::vector<Atom> encode_state(const BeliefState& state, const DomainSpec& spec);
std::vector<Atom> encode_acts(const std::vector<DialogAct>& acts, Side side);

struct BuiltSample {
  Sample sample;
  /// False when the turn has no system act; such turns are scored but not trained on.
  bool trainable = true;
};

/// B = state and user acts, P = system acts, N = every other grounding of the
/// system-act predicates over C = spec.constants().
BuiltSample build_sample(const Turn& turn, const DomainSpec& spec);

/// Inverse of encode_acts on system atoms; sorted by (intent, slot).
/// Throws ValidationError on structural constants or non-system predicates.
std::vector<DialogAct> decode_actions(const std::vector<Atom>& derived);

// --- MultiWoZ-style annotated dialogs -------------------------------------

struct AnnotatedAct {
  std::string intent;
  std::string domain;
  std::string slot;
};

struct AnnotatedTurn {
  std::vector<AnnotatedAct> user_acts;
  std::vector<AnnotatedAct> system_acts;
  /// domain -> ordered (slot, value) pairs, semi slots before book slots
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> belief_state;
  std::map<std::string, bool> no_match;   // per domain
  std::map<std::string, bool> book_fail;  // per domain
};

struct AnnotatedDialog {
  std::string id;
  std::vector<AnnotatedTurn> turns;
};

struct DomainSample {
  std::string domain;
  int turn = 0;
  BuiltSample built;
};

std::vector<Predicate> multiwoz_system_predicates();
std::vector<Predicate> multiwoz_state_predicates();

/// Slot names as used in the logical form (pricerange -> price).
std::string normalize_multiwoz_slot(std::string_view slot);

/// One sample per (turn, non-general domain with acts in that turn).
/// General-domain acts are dropped; select/recommend/offerbook count as
/// inform. Throws ValidationError naming the turn on schema violations.
std::vector<DomainSample> convert_multiwoz(const AnnotatedDialog& dialog);

}  // namespace dilog
