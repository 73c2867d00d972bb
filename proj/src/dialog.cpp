#include "dilog/dialog.hpp"

#include <algorithm>
#include <cctype>

#include "dilog/error.hpp"

namespace dilog {

namespace {

Atom unary(std::string_view pred, std::string_view c) { return ground_atom(pred, {c}); }
Atom nullary(std::string_view pred) { return ground_atom(pred, {}); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const std::string& require_slot(const DialogAct& act) {
  if (!act.slot) throw ValidationError("act " + to_string(act.intent) + " needs a slot");
  return *act.slot;
}

}  // namespace

void DomainSpec::validate() const {
  if (user_slots.empty() || system_slots.empty()) {
    throw ValidationError("domain " + name + " needs user and system slots");
  }
  std::set<std::string> seen;
  for (const auto* list : {&user_slots, &system_slots}) {
    for (const auto& s : *list) {
      if (!is_constant_name(s)) throw ValidationError("invalid slot name '" + s + "'");
      if (s == kTerminalConstant || s == kUserListConstant) {
        throw ValidationError("slot name '" + s + "' is reserved");
      }
      if (!seen.insert(s).second) throw ValidationError("slot '" + s + "' repeated in domain " + name);
    }
  }
}

bool DomainSpec::has_user_slot(std::string_view s) const { return contains(user_slots, s); }
bool DomainSpec::has_system_slot(std::string_view s) const { return contains(system_slots, s); }

std::vector<std::string> DomainSpec::constants() const {
  std::vector<std::string> out = user_slots;
  out.insert(out.end(), system_slots.begin(), system_slots.end());
  out.emplace_back(kTerminalConstant);
  out.emplace_back(kUserListConstant);
  return out;
}

DomainSpec builtin_domain(std::string_view name) {
  // restaurant and movie follow the published slot metadata; bus and weather
  // are stand-ins with different slot counts.
  if (name == "restaurant") return {"restaurant", {"food_pref", "loc"}, {"default", "open", "price", "parking"}};
  if (name == "movie") return {"movie", {"genre", "years", "country"}, {"default", "rating", "company", "director"}};
  if (name == "bus") return {"bus", {"from_loc", "to_loc", "datetime"}, {"default", "arrive_in", "duration"}};
  if (name == "weather") {
    return {"weather", {"loc", "datetime"}, {"default", "temperature", "rain", "wind", "humidity"}};
  }
  throw ValidationError("unknown domain '" + std::string(name) + "'");
}

std::vector<std::string> builtin_domain_names() { return {"restaurant", "movie", "bus", "weather"}; }

std::string to_string(Intent i) {
  switch (i) {
    case Intent::Inform: return "inform";
    case Intent::Request: return "request";
    case Intent::Query: return "query";
    case Intent::OfferBooked: return "offerbooked";
    case Intent::NoOffer: return "nooffer";
  }
  return "inform";
}

Intent parse_intent(std::string_view s) {
  const std::string l = lower(s);
  if (l == "inform") return Intent::Inform;
  if (l == "request") return Intent::Request;
  if (l == "query") return Intent::Query;
  if (l == "offerbooked") return Intent::OfferBooked;
  if (l == "nooffer") return Intent::NoOffer;
  throw ValidationError("unknown intent '" + std::string(s) + "'");
}

std::vector<Predicate> simdial_system_predicates() {
  return {{"sys_request", 1}, {"sys_inform", 1}, {"sys_query", 1}};
}

std::vector<Predicate> simdial_state_predicates() {
  return {{"terminal", 1}, {"succ", 2},       {"usr_slots", 1},  {"known", 1},
          {"unknown", 1},  {"inform", 1},     {"request", 1},    {"kb_return", 1},
          {"outdated", 1}};
}

std::vector<Atom> encode_state(const BeliefState& state, const DomainSpec& spec) {
  auto check = [&](const std::set<std::string>& slots, bool system_only) {
    for (const auto& s : slots) {
      const bool ok = spec.has_system_slot(s) || (!system_only && spec.has_user_slot(s));
      if (!ok) throw ValidationError("slot '" + s + "' is not part of domain " + spec.name);
    }
  };
  check(state.known, false);
  check(state.kb_return, true);
  check(state.outdated, true);

  std::vector<Atom> out;
  for (const auto& s : spec.user_slots) out.push_back(unary(state.known.count(s) ? "known" : "unknown", s));
  out.push_back(unary("terminal", kTerminalConstant));
  out.push_back(unary("known", kUserListConstant));
  out.push_back(unary("usr_slots", kUserListConstant));
  std::string_view prev = kUserListConstant;
  for (const auto& s : spec.user_slots) {
    out.push_back(ground_atom("succ", {prev, s}));
    prev = s;
  }
  out.push_back(ground_atom("succ", {prev, kTerminalConstant}));
  for (const auto& s : spec.system_slots) out.push_back(unary(state.known.count(s) ? "known" : "unknown", s));
  for (const auto& s : state.kb_return) out.push_back(unary("kb_return", s));
  for (const auto& s : state.outdated) out.push_back(unary("outdated", s));
  if (state.no_match) out.push_back(nullary("no_match"));
  if (state.book_fail) out.push_back(nullary("book_fail"));
  return out;
}

std::vector<Atom> encode_acts(const std::vector<DialogAct>& acts, Side side) {
  std::vector<Atom> out;
  for (const DialogAct& act : acts) {
    if (side == Side::User) {
      switch (act.intent) {
        case Intent::Inform: out.push_back(unary("inform", require_slot(act))); break;
        case Intent::Request: out.push_back(unary("request", require_slot(act))); break;
        default: throw ValidationError("user side has no intent " + to_string(act.intent));
      }
      continue;
    }
    switch (act.intent) {
      case Intent::Inform: out.push_back(unary("sys_inform", require_slot(act))); break;
      case Intent::Request: out.push_back(unary("sys_request", require_slot(act))); break;
      case Intent::Query: out.push_back(unary("sys_query", require_slot(act))); break;
      case Intent::NoOffer: out.push_back(nullary("nooffer")); break;
      case Intent::OfferBooked: out.push_back(nullary("offerbooked")); break;
    }
  }
  return out;
}

namespace {

std::vector<Atom> closed_world_negatives(const std::vector<Predicate>& system_preds,
                                         const std::vector<std::string>& constants, const std::vector<Atom>& positive) {
  const std::set<Atom> pos(positive.begin(), positive.end());
  std::vector<Atom> out;
  for (const Predicate& p : system_preds) {
    if (p.arity == 0) {
      Atom a(p, {});
      if (pos.count(a) == 0) out.push_back(std::move(a));
      continue;
    }
    for (const auto& c : constants) {
      Atom a(p, {Term::constant(c)});
      if (pos.count(a) == 0) out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<Atom> dedupe(std::vector<Atom> atoms) {
  std::vector<Atom> out;
  std::set<Atom> seen;
  for (auto& a : atoms) {
    if (seen.insert(a).second) out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

BuiltSample build_sample(const Turn& turn, const DomainSpec& spec) {
  spec.validate();
  BuiltSample out;
  Sample& s = out.sample;
  s.constants = spec.constants();
  s.background = encode_state(turn.state, spec);
  for (const DialogAct& a : turn.user_acts) {
    if (a.slot && !spec.has_user_slot(*a.slot) && !spec.has_system_slot(*a.slot)) {
      throw ValidationError("user act slot '" + *a.slot + "' is not part of domain " + spec.name);
    }
  }
  for (const DialogAct& a : turn.system_acts) {
    if (a.slot && !spec.has_user_slot(*a.slot) && !spec.has_system_slot(*a.slot)) {
      throw ValidationError("system act slot '" + *a.slot + "' is not part of domain " + spec.name);
    }
  }
  auto user = encode_acts(turn.user_acts, Side::User);
  s.background.insert(s.background.end(), user.begin(), user.end());
  s.background = dedupe(std::move(s.background));
  s.positive = dedupe(encode_acts(turn.system_acts, Side::System));
  s.negative = closed_world_negatives(simdial_system_predicates(), s.constants, s.positive);
  out.trainable = !s.positive.empty();
  return out;
}

std::vector<DialogAct> decode_actions(const std::vector<Atom>& derived) {
  std::vector<DialogAct> out;
  for (const Atom& a : derived) {
    const std::string& p = a.predicate.name;
    DialogAct act;
    if (a.predicate.arity == 1) {
      const std::string& slot = a.args[0].name();
      if (slot == kTerminalConstant || slot == kUserListConstant) {
        throw ValidationError("derived atom " + a.to_string() + " names a structural constant, not a slot");
      }
      act.slot = slot;
      if (p == "sys_request") {
        act.intent = Intent::Request;
      } else if (p == "sys_inform") {
        act.intent = Intent::Inform;
      } else if (p == "sys_query") {
        act.intent = Intent::Query;
      } else {
        throw ValidationError("atom " + a.to_string() + " is not a system act");
      }
    } else if (a.predicate.arity == 0 && p == "nooffer") {
      act.intent = Intent::NoOffer;
    } else if (a.predicate.arity == 0 && p == "offerbooked") {
      act.intent = Intent::OfferBooked;
    } else {
      throw ValidationError("atom " + a.to_string() + " is not a system act");
    }
    out.push_back(std::move(act));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- MultiWoZ ---------------------------------------------------------------

std::vector<Predicate> multiwoz_system_predicates() {
  return {{"sys_request", 1}, {"sys_inform", 1}, {"offerbooked", 0}, {"nooffer", 0}};
}

std::vector<Predicate> multiwoz_state_predicates() {
  return {{"usr_inform", 1}, {"usr_request", 1}, {"known", 1}, {"unknown", 1}, {"no_match", 0}, {"book_fail", 0}};
}

std::string normalize_multiwoz_slot(std::string_view slot) {
  std::string s = lower(slot);
  if (s == "pricerange") return "price";
  for (char& c : s) {
    if (c == ' ' || c == '-') c = '_';
  }
  return s;
}

namespace {

bool is_unset_value(std::string_view v) {
  const std::string l = lower(v);
  return l.empty() || l == "not mentioned" || l == "none";
}

bool is_no_slot(std::string_view s) {
  const std::string l = lower(s);
  return l.empty() || l == "none" || l == "?";
}

}  // namespace

std::vector<DomainSample> convert_multiwoz(const AnnotatedDialog& dialog) {
  std::vector<DomainSample> out;

  // Constants per domain: every state slot and act slot seen anywhere in the dialog.
  std::map<std::string, std::vector<std::string>> constants;
  auto add_constant = [&](const std::string& domain, const std::string& slot) {
    auto& list = constants[domain];
    if (!contains(list, slot)) list.push_back(slot);
  };
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    const AnnotatedTurn& turn = dialog.turns[t];
    for (const auto& [domain, slots] : turn.belief_state) {
      for (const auto& [slot, value] : slots) add_constant(lower(domain), normalize_multiwoz_slot(slot));
    }
    for (const auto* acts : {&turn.user_acts, &turn.system_acts}) {
      for (const AnnotatedAct& a : *acts) {
        if (a.intent.empty() || a.domain.empty()) {
          throw ValidationError("turn " + std::to_string(t) + ": act needs intent and domain");
        }
        if (lower(a.domain) == "general" || is_no_slot(a.slot)) continue;
        add_constant(lower(a.domain), normalize_multiwoz_slot(a.slot));
      }
    }
  }
  for (auto& [domain, list] : constants) {
    for (const auto& c : list) {
      if (!is_constant_name(c)) throw ValidationError("slot '" + c + "' in domain " + domain + " is not a valid constant");
    }
  }

  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    const AnnotatedTurn& turn = dialog.turns[t];
    std::vector<std::string> domains;
    for (const auto* acts : {&turn.user_acts, &turn.system_acts}) {
      for (const AnnotatedAct& a : *acts) {
        const std::string d = lower(a.domain);
        if (d != "general" && !contains(domains, d)) domains.push_back(d);
      }
    }
    for (const std::string& d : domains) {
      DomainSample ds;
      ds.domain = d;
      ds.turn = static_cast<int>(t);
      Sample& s = ds.built.sample;
      s.constants = constants[d];
      if (s.constants.empty()) s.constants.push_back("none");

      for (const AnnotatedAct& a : turn.user_acts) {
        if (lower(a.domain) != d || is_no_slot(a.slot)) continue;
        const std::string intent = lower(a.intent);
        const std::string slot = normalize_multiwoz_slot(a.slot);
        if (intent == "inform") s.background.push_back(unary("usr_inform", slot));
        if (intent == "request") s.background.push_back(unary("usr_request", slot));
      }
      for (const auto& [domain, slots] : turn.belief_state) {
        if (lower(domain) != d) continue;
        for (const auto& [slot, value] : slots) {
          s.background.push_back(unary(is_unset_value(value) ? "unknown" : "known", normalize_multiwoz_slot(slot)));
        }
      }
      if (auto it = turn.no_match.find(d); it != turn.no_match.end() && it->second) s.background.push_back(nullary("no_match"));
      if (auto it = turn.book_fail.find(d); it != turn.book_fail.end() && it->second) {
        s.background.push_back(nullary("book_fail"));
      }

      for (const AnnotatedAct& a : turn.system_acts) {
        if (lower(a.domain) != d) continue;
        const std::string intent = lower(a.intent);
        const bool slotless = is_no_slot(a.slot);
        const std::string slot = slotless ? "" : normalize_multiwoz_slot(a.slot);
        if (intent == "nooffer" || intent == "nobook") {
          s.positive.push_back(nullary("nooffer"));
        } else if (intent == "offerbooked" || intent == "book") {
          s.positive.push_back(nullary("offerbooked"));
        } else if (intent == "inform" || intent == "select" || intent == "recommend" || intent == "offerbook") {
          if (!slotless) s.positive.push_back(unary("sys_inform", slot));
        } else if (intent == "request") {
          if (!slotless) s.positive.push_back(unary("sys_request", slot));
        }
      }
      s.background = dedupe(std::move(s.background));
      s.positive = dedupe(std::move(s.positive));
      s.negative = closed_world_negatives(multiwoz_system_predicates(), s.constants, s.positive);
      ds.built.trainable = !s.positive.empty();
      out.push_back(std::move(ds));
    }
  }
  return out;
}

}  // namespace dilog
