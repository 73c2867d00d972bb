#include "dilog/io.hpp"

#include <fstream>
#include <sstream>

#include "dilog/error.hpp"

namespace dilog::io {

namespace {

const json& field(const json& j, std::string_view key) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError("missing field '" + std::string(key) + "'");
  return *it;
}

template <typename T>
T get(const json& j, std::string_view key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("field '" + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, std::string_view key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

json acts_to_json(const std::vector<DialogAct>& acts) {
  json out = json::array();
  for (const DialogAct& a : acts) {
    json entry = json::array({to_string(a.intent)});
    if (a.slot) entry.push_back(*a.slot);
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<DialogAct> acts_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("acts must be an array");
  std::vector<DialogAct> out;
  for (const json& e : j) {
    if (!e.is_array() || e.empty() || e.size() > 2 || !e[0].is_string()) {
      throw ValidationError("act must be [intent] or [intent, slot]");
    }
    DialogAct a;
    a.intent = parse_intent(e[0].get<std::string>());
    if (e.size() == 2) {
      if (!e[1].is_string()) throw ValidationError("act slot must be a string");
      a.slot = e[1].get<std::string>();
    }
    out.push_back(std::move(a));
  }
  return out;
}

json atoms_to_json(const std::vector<Atom>& atoms) {
  json out = json::array();
  for (const Atom& a : atoms) out.push_back(a.to_string());
  return out;
}

std::vector<Atom> atoms_from_json(const json& j, std::string_view key) {
  std::vector<Atom> out;
  for (const auto& s : get<std::vector<std::string>>(j, key)) out.push_back(parse_atom(s));
  return out;
}

json predicates_to_json(const std::vector<Predicate>& preds) {
  json out = json::array();
  for (const Predicate& p : preds) out.push_back(p.to_string());
  return out;
}

std::vector<Predicate> predicates_from_json(const json& j, std::string_view key) {
  std::vector<Predicate> out;
  for (const auto& s : get<std::vector<std::string>>(j, key)) out.push_back(parse_predicate(s));
  return out;
}

json clauses_to_json(const std::vector<Clause>& clauses) {
  json out = json::array();
  for (const Clause& c : clauses) out.push_back(c.to_string());
  return out;
}

std::vector<Clause> clauses_from_json(const json& j, std::string_view key) {
  std::vector<Clause> out;
  if (!j.contains(key)) return out;
  for (const auto& s : get<std::vector<std::string>>(j, key)) out.push_back(parse_clause(s));
  return out;
}

json frame_to_json(const LanguageFrame& f) {
  return json{{"targets", predicates_to_json(f.targets)}, {"extensional", predicates_to_json(f.extensional)}};
}

LanguageFrame frame_from_json(const json& j) {
  LanguageFrame f;
  f.targets = predicates_from_json(j, "targets");
  f.extensional = predicates_from_json(j, "extensional");
  return f;
}

json program_to_json(const ProgramTemplate& pt) {
  json slots = json::array();
  for (const PredicateSlots& ps : pt.predicates) {
    json templates = json::array();
    for (const RuleTemplate& r : ps.slots) templates.push_back(json{{"v", r.extra_variables}, {"i", r.allow_intensional}});
    slots.push_back(json{{"predicate", ps.predicate.to_string()}, {"templates", std::move(templates)}});
  }
  return json{{"auxiliary", predicates_to_json(pt.auxiliary)},
              {"slots", std::move(slots)},
              {"forward_steps", pt.forward_steps}};
}

ProgramTemplate program_from_json(const json& j) {
  ProgramTemplate pt;
  if (j.contains("auxiliary")) pt.auxiliary = predicates_from_json(j, "auxiliary");
  pt.forward_steps = get_or<int>(j, "forward_steps", pt.forward_steps);
  const json& slots = field(j, "slots");
  if (!slots.is_array()) throw ValidationError("'slots' must be an array");
  for (const json& s : slots) {
    PredicateSlots ps;
    ps.predicate = parse_predicate(get<std::string>(s, "predicate"));
    const json& templates = field(s, "templates");
    if (!templates.is_array()) throw ValidationError("'templates' must be an array");
    for (const json& t : templates) {
      RuleTemplate r;
      r.extra_variables = get<int>(t, "v");
      const json& i = field(t, "i");
      r.allow_intensional = i.is_boolean() ? i.get<bool>() : get<int>(t, "i") != 0;
      ps.slots.push_back(r);
    }
    pt.predicates.push_back(std::move(ps));
  }
  return pt;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
  if (!out) throw ValidationError("cannot write " + path);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string(what) + ": invalid JSON (" + e.what() + ")");
  }
}

std::vector<json> parse_jsonl(std::string_view text, std::string_view what) {
  std::vector<json> out;
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(json::parse(row));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string(what) + " line " + std::to_string(line) + ": invalid JSON");
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

namespace {

template <typename T, typename F>
std::vector<T> from_jsonl(std::string_view text, std::string_view what, F convert) {
  std::vector<T> out;
  std::size_t i = 0;
  for (const json& j : parse_jsonl(text, what)) {
    ++i;
    try {
      out.push_back(convert(j));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(what) + " record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

json to_json(const DomainSpec& d) {
  return json{{"name", d.name}, {"user_slots", d.user_slots}, {"system_slots", d.system_slots}};
}

DomainSpec domain_from_json(const json& j) {
  DomainSpec d{get<std::string>(j, "name"), get<std::vector<std::string>>(j, "user_slots"),
               get<std::vector<std::string>>(j, "system_slots")};
  d.validate();
  return d;
}

json to_json(const Dialog& d) {
  json turns = json::array();
  for (const Turn& t : d.turns) {
    json state{{"known", t.state.known},
               {"kb_return", t.state.kb_return},
               {"outdated", t.state.outdated},
               {"no_match", t.state.no_match},
               {"book_fail", t.state.book_fail}};
    turns.push_back(json{{"state", std::move(state)},
                         {"user_acts", acts_to_json(t.user_acts)},
                         {"system_acts", acts_to_json(t.system_acts)},
                         {"correction", t.correction}});
  }
  return json{{"domain", to_json(d.domain)}, {"turns", std::move(turns)}};
}

Dialog dialog_from_json(const json& j) {
  Dialog d;
  d.domain = domain_from_json(field(j, "domain"));
  const json& turns = field(j, "turns");
  if (!turns.is_array()) throw ValidationError("'turns' must be an array");
  for (const json& t : turns) {
    Turn turn;
    const json& s = field(t, "state");
    turn.state.known = get<std::set<std::string>>(s, "known");
    turn.state.kb_return = get_or<std::set<std::string>>(s, "kb_return", {});
    turn.state.outdated = get_or<std::set<std::string>>(s, "outdated", {});
    turn.state.no_match = get_or<bool>(s, "no_match", false);
    turn.state.book_fail = get_or<bool>(s, "book_fail", false);
    turn.user_acts = acts_from_json(field(t, "user_acts"));
    turn.system_acts = acts_from_json(field(t, "system_acts"));
    turn.correction = get_or<bool>(t, "correction", false);
    turn.domain = d.domain.name;
    d.turns.push_back(std::move(turn));
  }
  return d;
}

std::string dialogs_to_jsonl(const std::vector<Dialog>& dialogs) {
  std::vector<json> records;
  for (const Dialog& d : dialogs) records.push_back(to_json(d));
  return to_jsonl(records);
}

std::vector<Dialog> dialogs_from_jsonl(std::string_view text) {
  return from_jsonl<Dialog>(text, "dialog corpus", dialog_from_json);
}

json to_json(const LabeledSample& s) {
  const Sample& x = s.built.sample;
  return json{{"dialog", s.dialog},
              {"turn", s.turn},
              {"domain", s.domain},
              {"correction", s.correction},
              {"trainable", s.built.trainable},
              {"background", atoms_to_json(x.background)},
              {"positive", atoms_to_json(x.positive)},
              {"negative", atoms_to_json(x.negative)},
              {"constants", x.constants}};
}

LabeledSample sample_from_json(const json& j) {
  LabeledSample s;
  s.dialog = get<int>(j, "dialog");
  s.turn = get<int>(j, "turn");
  s.domain = get<std::string>(j, "domain");
  s.correction = get_or<bool>(j, "correction", false);
  s.built.sample.background = atoms_from_json(j, "background");
  s.built.sample.positive = atoms_from_json(j, "positive");
  s.built.sample.negative = atoms_from_json(j, "negative");
  s.built.sample.constants = get<std::vector<std::string>>(j, "constants");
  s.built.trainable = get_or<bool>(j, "trainable", !s.built.sample.positive.empty());
  return s;
}

std::string samples_to_jsonl(const std::vector<LabeledSample>& samples) {
  std::vector<json> records;
  for (const LabeledSample& s : samples) records.push_back(to_json(s));
  return to_jsonl(records);
}

std::vector<LabeledSample> samples_from_jsonl(std::string_view text) {
  return from_jsonl<LabeledSample>(text, "sample file", sample_from_json);
}

json to_json(const PolicyConfig& c) {
  json libs = json::array();
  for (const LibraryRef& l : c.libraries) {
    json entry{{"library", l.name}};
    if (!l.rename.empty()) entry["rename"] = l.rename;
    libs.push_back(std::move(entry));
  }
  json out = frame_to_json(c.frame);
  const json program = program_to_json(c.program);
  for (const auto& [k, v] : program.items()) out[k] = v;
  out["background"] = std::move(libs);
  out["clauses"] = clauses_to_json(c.clauses);
  return out;
}

PolicyConfig policy_config_from_json(const json& j) {
  PolicyConfig c;
  c.frame = frame_from_json(j);
  c.program = program_from_json(j);
  if (j.contains("background")) {
    const json& libs = field(j, "background");
    if (!libs.is_array()) throw ValidationError("'background' must be an array");
    for (const json& l : libs) {
      c.libraries.push_back(LibraryRef{get<std::string>(l, "library"),
                                       get_or<std::map<std::string, std::string>>(l, "rename", {})});
    }
  }
  c.clauses = clauses_from_json(j, "clauses");
  c.validate();
  return c;
}

json to_json(const Hyperparams& hp) {
  return json{{"learning_rate", hp.learning_rate},
              {"training_steps", hp.training_steps},
              {"regularizer", to_string(hp.regularizer)},
              {"reg_lambda", hp.reg_lambda},
              {"seed", hp.seed},
              {"init_scale", hp.init_scale},
              {"amalgamation", to_string(hp.amalgamation)},
              {"restarts", hp.restarts}};
}

Hyperparams hyperparams_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("hyperparameters must be a JSON object");
  static const std::set<std::string> keys = {"learning_rate", "training_steps", "regularizer", "reg_lambda",
                                             "seed",          "init_scale",     "amalgamation", "restarts"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ValidationError("unknown hyperparameter '" + k + "'");
  }
  Hyperparams hp;
  hp.learning_rate = get_or<double>(j, "learning_rate", hp.learning_rate);
  hp.training_steps = get_or<int>(j, "training_steps", hp.training_steps);
  hp.regularizer = parse_regularizer(get_or<std::string>(j, "regularizer", to_string(hp.regularizer)));
  hp.reg_lambda = get_or<double>(j, "reg_lambda", hp.reg_lambda);
  hp.seed = get_or<std::uint64_t>(j, "seed", hp.seed);
  hp.init_scale = get_or<double>(j, "init_scale", hp.init_scale);
  hp.amalgamation = parse_amalgamation(get_or<std::string>(j, "amalgamation", to_string(hp.amalgamation)));
  hp.restarts = get_or<int>(j, "restarts", hp.restarts);
  hp.validate();
  return hp;
}

json to_json(const TrainedModel& m) {
  json out = frame_to_json(m.spec->frame);
  const json program = program_to_json(m.program_template);
  for (const auto& [k, v] : program.items()) out[k] = v;
  out["background"] = clauses_to_json(m.spec->background);
  out["hyperparams"] = to_json(m.hyperparams);
  out["restart"] = m.restart;
  out["weights"] = m.weights.raw();
  out["loss_trace"] = m.loss_trace;
  return out;
}

TrainedModel trained_model_from_json(const json& j) {
  TrainedModel m;
  const LanguageFrame frame = frame_from_json(j);
  m.program_template = program_from_json(j);
  m.hyperparams = hyperparams_from_json(field(j, "hyperparams"));
  SpecOptions options;
  options.amalgamation = m.hyperparams.amalgamation;
  m.spec = std::make_shared<const ModelSpec>(
      build_model_spec(m.program_template, frame, clauses_from_json(j, "background"), options));
  m.weights = ClauseWeights(*m.spec);
  const auto raw = get<std::vector<double>>(j, "weights");
  if (raw.size() != m.weights.size()) {
    throw ValidationError("model has " + std::to_string(raw.size()) + " weights, template needs " +
                          std::to_string(m.weights.size()));
  }
  m.weights.raw() = raw;
  m.loss_trace = get_or<std::vector<double>>(j, "loss_trace", {});
  m.restart = get_or<int>(j, "restart", 0);
  return m;
}

json to_json(const Prediction& p) {
  return json{{"dialog", p.dialog}, {"turn", p.turn}, {"domain", p.domain}, {"acts", acts_to_json(p.acts)}};
}

Prediction prediction_from_json(const json& j) {
  return Prediction{get<int>(j, "dialog"), get<int>(j, "turn"), get<std::string>(j, "domain"),
                    acts_from_json(field(j, "acts"))};
}

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions) {
  std::vector<json> records;
  for (const Prediction& p : predictions) records.push_back(to_json(p));
  return to_jsonl(records);
}

std::vector<Prediction> predictions_from_jsonl(std::string_view text) {
  return from_jsonl<Prediction>(text, "prediction file", prediction_from_json);
}

namespace {

json score_to_json(const MetricScore& s) {
  return json{{"f1", s.f1},
              {"standard_error", s.standard_error},
              {"tp", s.counts.tp},
              {"fp", s.counts.fp},
              {"fn", s.counts.fn}};
}

json domain_metrics_to_json(const DomainMetrics& m) {
  return json{{"turns", m.turns},
              {"intent", score_to_json(m.intent)},
              {"entity", score_to_json(m.entity)},
              {"action", score_to_json(m.action)}};
}

}  // namespace

json to_json(const MetricsReport& r) {
  json domains = json::object();
  for (const auto& [name, m] : r.domains) domains[name] = domain_metrics_to_json(m);
  json out = domain_metrics_to_json(r.overall);
  out["intent_f1"] = r.overall.intent.f1;
  out["entity_f1"] = r.overall.entity.f1;
  out["action_f1"] = r.overall.action.f1;
  out["domains"] = std::move(domains);
  return out;
}

namespace {

std::vector<AnnotatedAct> annotated_acts(const json& j, std::string_view key) {
  std::vector<AnnotatedAct> out;
  if (!j.contains(key)) return out;
  const json& acts = field(j, key);
  if (!acts.is_array()) throw ValidationError("'" + std::string(key) + "' must be an array");
  for (const json& a : acts) {
    if (!a.is_array() || a.size() != 3 || !a[0].is_string() || !a[1].is_string() || !a[2].is_string()) {
      throw ValidationError("act must be an [intent, domain, slot] triple");
    }
    out.push_back(AnnotatedAct{a[0].get<std::string>(), a[1].get<std::string>(), a[2].get<std::string>()});
  }
  return out;
}

void add_slots(const json& part, std::vector<std::pair<std::string, std::string>>& out) {
  if (!part.is_object()) throw ValidationError("belief state part must be an object");
  for (const auto& [slot, value] : part.items()) {
    if (slot == "booked") continue;
    if (!value.is_string()) throw ValidationError("belief state value of '" + slot + "' must be a string");
    out.emplace_back(slot, value.get<std::string>());
  }
}

AnnotatedDialog annotated_dialog_from_json(const json& j) {
  AnnotatedDialog d;
  d.id = get_or<std::string>(j, "id", "");
  const json& turns = field(j, "turns");
  if (!turns.is_array()) throw ValidationError("'turns' must be an array");
  for (std::size_t t = 0; t < turns.size(); ++t) {
    try {
      const json& tj = turns[t];
      AnnotatedTurn turn;
      turn.user_acts = annotated_acts(tj, "user_acts");
      turn.system_acts = annotated_acts(tj, "system_acts");
      if (tj.contains("belief_state")) {
        for (const auto& [domain, parts] : field(tj, "belief_state").items()) {
          auto& slots = turn.belief_state[domain];
          if (parts.contains("semi")) add_slots(parts["semi"], slots);
          if (parts.contains("book")) add_slots(parts["book"], slots);
        }
      }
      if (tj.contains("db_pointer")) {
        for (const auto& [domain, flags] : field(tj, "db_pointer").items()) {
          turn.no_match[domain] = get_or<bool>(flags, "no_match", false);
          turn.book_fail[domain] = get_or<bool>(flags, "book_fail", false);
        }
      }
      d.turns.push_back(std::move(turn));
    } catch (const ValidationError& e) {
      throw ValidationError("turn " + std::to_string(t) + ": " + e.what());
    }
  }
  return d;
}

}  // namespace

std::vector<AnnotatedDialog> annotated_dialogs_from_json(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') {
    const json all = parse_json(text, "annotated corpus");
    std::vector<AnnotatedDialog> out;
    for (std::size_t i = 0; i < all.size(); ++i) {
      try {
        out.push_back(annotated_dialog_from_json(all[i]));
      } catch (const ValidationError& e) {
        throw ValidationError("annotated dialog " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return out;
  }
  return from_jsonl<AnnotatedDialog>(text, "annotated corpus", annotated_dialog_from_json);
}

json to_json(const AnnotatedDialog& d) {
  json turns = json::array();
  for (const AnnotatedTurn& t : d.turns) {
    auto acts = [](const std::vector<AnnotatedAct>& v) {
      json out = json::array();
      for (const auto& a : v) out.push_back(json::array({a.intent, a.domain, a.slot}));
      return out;
    };
    json belief = json::object();
    for (const auto& [domain, slots] : t.belief_state) {
      json semi = json::object();
      for (const auto& [s, v] : slots) semi[s] = v;
      belief[domain] = json{{"semi", std::move(semi)}};
    }
    json db = json::object();
    for (const auto& [domain, flag] : t.no_match) db[domain]["no_match"] = flag;
    for (const auto& [domain, flag] : t.book_fail) db[domain]["book_fail"] = flag;
    turns.push_back(json{{"user_acts", acts(t.user_acts)},
                         {"system_acts", acts(t.system_acts)},
                         {"belief_state", std::move(belief)},
                         {"db_pointer", std::move(db)}});
  }
  return json{{"id", d.id}, {"turns", std::move(turns)}};
}

}  // namespace dilog::io
